"""Weighted benchmarking of cases under extreme conditions.

For each case ``c`` and return period ``T``::

    E_c     = N_c / sum_k N_k                  share of all extreme events
    P(T, b) = x_b(T) / T                       b in {rv, lower, upper}
    S(T, b) = E_c * P(T, b)
    B(T, b) = S(T, b) * sum_i w_i * C_i

where ``x_b(T)`` is the return value or one of its confidence bounds and
``C_i`` is the (optionally normalized) statistic of companion variable ``i``
over the case's extreme rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import AllZero, NoExtremeRows, PeriodMismatch, WeightMismatch
from .eva.pot import ReturnLevelEntry, ThresholdSpec
from .ingest import TimeSeriesTable
from .stats import NormalizationSpec

BOUNDS = ("rv", "lower", "upper")

Statistic = Literal["mean", "sum"]

# example weight profile for a PV plant; irradiance dominates
SUGGESTED_WEIGHTS = {
    "humidity": 0.05,
    "temperature": 0.1,
    "cloudcover": 0.2,
    "windspeed": 0.05,
    "solar": 0.4,
    "diffuse_solar": 0.2,
}


@dataclass(frozen=True)
class BenchmarkConfig:
    weights: Mapping[str, float]
    statistic: Statistic = "mean"
    normalization: NormalizationSpec | None = None
    return_periods: tuple[float, ...] = (1.0, 2.0, 5.0, 10.0, 25.0)

    def __post_init__(self) -> None:
        if self.statistic not in ("mean", "sum"):
            raise ValueError(f"statistic must be 'mean' or 'sum', got {self.statistic!r}")
        for k, w in self.weights.items():
            if not 0.0 <= w <= 1.0:
                raise WeightMismatch(f"weight for {k!r} must lie in [0, 1], got {w}")
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise WeightMismatch(f"weights must sum to 1, got {total!r}")
        object.__setattr__(self, "return_periods", tuple(float(t) for t in self.return_periods))

    def check_variables(self, companions: Sequence[str]) -> None:
        if set(self.weights) != set(companions):
            missing = sorted(set(companions) - set(self.weights))
            extra = sorted(set(self.weights) - set(companions))
            raise WeightMismatch(f"weights must cover exactly the companions; missing={missing}, unknown={extra}")


@dataclass(frozen=True)
class ExtremeConditionStats:
    """Per-companion statistic over extreme and over normal rows.

    ``normal`` entries are NaN when every row is extreme (``normal_empty``).
    """

    statistic: Statistic
    extreme: Mapping[str, float]
    normal: Mapping[str, float]
    n_extreme: int
    n_normal: int

    @property
    def normal_empty(self) -> bool:
        return self.n_normal == 0


def _reduce(x: np.ndarray, statistic: Statistic) -> float:
    if x.size == 0:
        return math.nan
    return float(x.mean()) if statistic == "mean" else float(x.sum())


def extreme_condition_stats(
    table: TimeSeriesTable, spec: ThresholdSpec, statistic: Statistic = "mean"
) -> ExtremeConditionStats:
    mask = spec.extreme_mask(table.dependent)
    n_ext = int(mask.sum())
    if n_ext == 0:
        raise NoExtremeRows(f"case {table.case_id!r}: no rows beyond threshold {spec.threshold}")
    comps = table.schema.companions
    return ExtremeConditionStats(
        statistic=statistic,
        extreme={v: _reduce(table.column(v)[mask], statistic) for v in comps},
        normal={v: _reduce(table.column(v)[~mask], statistic) for v in comps},
        n_extreme=n_ext,
        n_normal=int((~mask).sum()),
    )


def historical_share(counts: Mapping[str, int]) -> dict[str, float]:
    total = sum(int(n) for n in counts.values())
    if any(n < 0 for n in counts.values()):
        raise ValueError("event counts must be non-negative")
    if total == 0:
        raise AllZero("no extreme events in any case")
    return {k: int(n) / total for k, n in counts.items()}


def bare_rate(period: float) -> float:
    """Annual probability of an event with the given mean recurrence, ``1/T``."""
    if not period > 0:
        raise ValueError("return period must be positive")
    return 1.0 / period


def exceedance_factor(levels: Sequence[ReturnLevelEntry]) -> dict[tuple[float, str], float]:
    """``P(T, b) = x_b(T) / T`` for the return value and both CI bounds.

    Negative bounds propagate unmodified; the factor is a score multiplier,
    not a probability.
    """
    out: dict[tuple[float, str], float] = {}
    for e in levels:
        r = bare_rate(e.return_period)
        out[(e.return_period, "rv")] = r * e.return_value
        out[(e.return_period, "lower")] = r * e.ci_lower
        out[(e.return_period, "upper")] = r * e.ci_upper
    return out


@dataclass(frozen=True)
class BenchmarkScoreSeries:
    case_id: str
    periods: tuple[float, ...]
    rv: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    share: float = math.nan
    weighted_sum: float = math.nan
    contributions: Mapping[str, float] = field(default_factory=dict)

    def bound(self, b: str) -> tuple[float, ...]:
        return {"rv": self.rv, "lower": self.lower, "upper": self.upper}[b]


def normalized_statistic(
    stats: ExtremeConditionStats, var: str, spec: NormalizationSpec | None
) -> float:
    """Statistic of the normalized extreme values of ``var``.

    Normalization is affine, so the mean maps directly and the sum shifts by
    ``N * offset`` before scaling.
    """
    c = stats.extreme[var]
    if spec is None or var not in spec.params:
        return c
    off, scale = spec.offset_scale(var)
    if stats.statistic == "mean":
        return (c - off) / scale
    return (c - stats.n_extreme * off) / scale


def benchmark_scores(
    stats: ExtremeConditionStats,
    config: BenchmarkConfig,
    share: float,
    factors: Mapping[tuple[float, str], float],
    case_id: str = "",
) -> BenchmarkScoreSeries:
    config.check_variables(list(stats.extreme))
    contributions = {v: w * normalized_statistic(stats, v, config.normalization) for v, w in config.weights.items()}
    weighted = math.fsum(contributions.values())
    series = {}
    for b in BOUNDS:
        vals = []
        for t in config.return_periods:
            if (t, b) not in factors:
                raise PeriodMismatch(f"no exceedance factor for period {t} bound {b}")
            vals.append((share * factors[(t, b)]) * weighted)
        series[b] = tuple(vals)
    return BenchmarkScoreSeries(
        case_id=case_id,
        periods=config.return_periods,
        rv=series["rv"],
        lower=series["lower"],
        upper=series["upper"],
        share=share,
        weighted_sum=weighted,
        contributions=contributions,
    )


@dataclass(frozen=True)
class ComparisonVerdict:
    periods: tuple[float, ...]
    rankings: tuple[tuple[str, ...], ...]  # per period, most sensitive first
    ties: tuple[bool, ...]  # per period, top score shared
    overall_ranking: tuple[str, ...]
    mean_scores: Mapping[str, float]
    most_sensitive: str | None  # None on an overall tie
    tie: bool
    crossing: bool
    message: str


def _rank(scores: Mapping[str, float]) -> tuple[tuple[str, ...], bool]:
    order = tuple(sorted(scores, key=lambda k: (-scores[k], k)))
    tied = len(order) > 1 and scores[order[0]] == scores[order[1]]
    return order, tied


def compare_cases(series: Sequence[BenchmarkScoreSeries]) -> ComparisonVerdict:
    """Rank cases by return-value score; higher reads as less resilient.

    Rankings are given per period and overall by the mean score across
    periods. ``crossing`` is set when the per-period order changes anywhere.
    """
    if len(series) < 2:
        raise ValueError("comparison needs at least two score series")
    periods = series[0].periods
    for s in series[1:]:
        if s.periods != periods:
            raise PeriodMismatch(f"case {s.case_id!r} uses periods {s.periods}, expected {periods}")
    ids = [s.case_id for s in series]
    if len(set(ids)) != len(ids):
        raise ValueError("case ids must be unique")

    rankings, ties = [], []
    for i in range(len(periods)):
        order, tied = _rank({s.case_id: s.rv[i] for s in series})
        rankings.append(order)
        ties.append(tied)
    means = {s.case_id: math.fsum(s.rv) / len(s.rv) for s in series}
    overall, tie = _rank(means)
    crossing = len(set(rankings)) > 1
    if tie:
        message = f"tie: {overall[0]} and {overall[1]} have equal mean scores"
        top = None
    else:
        top = overall[0]
        message = f"{top} is the most sensitive (least resilient) case"
    if crossing:
        message += "; score series cross, per-period rankings differ"
    return ComparisonVerdict(
        periods=periods,
        rankings=tuple(rankings),
        ties=tuple(ties),
        overall_ranking=overall,
        mean_scores=means,
        most_sensitive=top,
        tie=tie,
        crossing=crossing,
        message=message,
    )
