"""Peaks-over-threshold extraction, GPD fitting and return levels.

Low-tail analysis works by reflection: for ``tail="low"`` the modelled
quantity is the deficit ``u - x`` of every observation strictly below ``u``,
so the same upper-tail theory applies unchanged and levels are mapped back
with ``x_T = u - m_T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np

from ..errors import EmptyInput, NoExceedances, TooFewExcesses
from ..ingest import TimeSeriesTable
from ..stats import percentile
from . import gpd

Tail = Literal["low", "high"]

DEFAULT_MIN_EXCESSES = 10


@dataclass(frozen=True)
class ThresholdSpec:
    """Percentile-based threshold.

    ``tail="low"`` with ``percentile=25`` selects values strictly below the 25th
    percentile; ``tail="high"`` with the same percentile selects values strictly
    above the 75th. ``threshold`` stays ``None`` until resolved against data.
    """

    percentile: float = 25.0
    tail: Tail = "low"
    threshold: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.percentile < 100:
            raise ValueError(f"percentile must lie in (0, 100), got {self.percentile}")
        if self.tail not in ("low", "high"):
            raise ValueError(f"tail must be 'low' or 'high', got {self.tail!r}")

    @property
    def resolved(self) -> bool:
        return self.threshold is not None

    @property
    def quantile_level(self) -> float:
        """Percentile actually evaluated on the data."""
        return self.percentile if self.tail == "low" else 100.0 - self.percentile

    def with_threshold(self, u: float) -> "ThresholdSpec":
        return replace(self, threshold=float(u))

    def extreme_mask(self, values: np.ndarray) -> np.ndarray:
        if self.threshold is None:
            raise ValueError("threshold spec is not resolved")
        values = np.asarray(values, dtype=float)
        return values < self.threshold if self.tail == "low" else values > self.threshold

    def excess(self, values: np.ndarray) -> np.ndarray:
        """Distance beyond the threshold, positive for extreme values."""
        values = np.asarray(values, dtype=float)
        return self.threshold - values if self.tail == "low" else values - self.threshold

    def to_level(self, m):
        """Map an excess-scale quantity back onto the dependent variable's scale."""
        m = np.asarray(m, dtype=float)
        return self.threshold - m if self.tail == "low" else self.threshold + m


def resolve_threshold(table: TimeSeriesTable, spec: ThresholdSpec) -> ThresholdSpec:
    if len(table) == 0:
        raise EmptyInput("cannot resolve a threshold on an empty table")
    return spec.with_threshold(float(percentile(table.dependent, spec.quantile_level)))


def count_years(table: TimeSeriesTable) -> int:
    return int(np.unique(table.years()).size) if len(table) else 0


@dataclass(frozen=True, eq=False)
class ExceedanceSet:
    threshold: float
    tail: Tail
    excesses: np.ndarray
    event_timestamps: np.ndarray
    span_years: float

    def __post_init__(self) -> None:
        y = np.asarray(self.excesses, dtype=float)
        if y.ndim != 1:
            raise ValueError("excesses must be one-dimensional")
        if np.any(y <= 0):
            raise ValueError("excesses must be strictly positive")
        if not self.span_years > 0:
            raise ValueError("span_years must be positive")
        y.setflags(write=False)
        object.__setattr__(self, "excesses", y)
        ts = np.asarray(self.event_timestamps, dtype="datetime64[s]")
        if ts.shape != y.shape:
            raise ValueError("event_timestamps must parallel excesses")
        ts.setflags(write=False)
        object.__setattr__(self, "event_timestamps", ts)

    @property
    def n(self) -> int:
        return int(self.excesses.size)

    @property
    def spec(self) -> ThresholdSpec:
        return ThresholdSpec(tail=self.tail, threshold=self.threshold)

    @classmethod
    def from_excesses(cls, excesses, *, threshold: float = 0.0, tail: Tail = "high",
                      span_years: float = 1.0) -> "ExceedanceSet":
        """Build a set directly from excess values (timestamps left as epoch)."""
        y = np.asarray(excesses, dtype=float)
        return cls(threshold, tail, y, np.zeros(y.shape, dtype="datetime64[s]"), span_years)


def extract_exceedances(table: TimeSeriesTable, spec: ThresholdSpec) -> ExceedanceSet:
    """Excesses of every row strictly beyond the resolved threshold.

    ``span_years`` counts the distinct calendar years present in ``table``.
    """
    if not spec.resolved:
        raise ValueError("threshold spec is not resolved")
    x = table.dependent
    mask = spec.extreme_mask(x)
    if not mask.any():
        raise NoExceedances(f"no values {'below' if spec.tail == 'low' else 'above'} threshold {spec.threshold}")
    return ExceedanceSet(
        threshold=float(spec.threshold),
        tail=spec.tail,
        excesses=spec.excess(x[mask]),
        event_timestamps=table.timestamps[mask],
        span_years=float(count_years(table)),
    )


@dataclass(frozen=True)
class GPDFit:
    shape: float
    scale: float
    threshold: float
    tail: Tail
    n_excesses: int
    log_likelihood: float
    iterations: int = 0
    start_log_likelihood: float = -math.inf

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError("GPD scale must be positive")

    @property
    def spec(self) -> ThresholdSpec:
        return ThresholdSpec(tail=self.tail, threshold=self.threshold)


def fit_gpd_mle(exceedances: ExceedanceSet, min_excesses: int = DEFAULT_MIN_EXCESSES) -> GPDFit:
    """Maximum-likelihood GPD fit of the excesses.

    Raises :class:`TooFewExcesses` below ``min_excesses`` and
    :class:`~extremebench.errors.FitDidNotConverge` if the optimiser fails.
    """
    if exceedances.n < max(min_excesses, 2):
        raise TooFewExcesses(exceedances.n, max(min_excesses, 2))
    res = gpd.fit_mle(exceedances.excesses)
    return GPDFit(
        shape=res.shape,
        scale=res.scale,
        threshold=exceedances.threshold,
        tail=exceedances.tail,
        n_excesses=exceedances.n,
        log_likelihood=res.log_likelihood,
        iterations=res.iterations,
        start_log_likelihood=res.start_log_likelihood,
    )


@dataclass(frozen=True)
class PoissonRate:
    """Mean number of threshold exceedances per year."""

    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError("exceedance rate must be positive")

    @classmethod
    def from_exceedances(cls, exceedances: ExceedanceSet) -> "PoissonRate":
        return cls(exceedances.n / exceedances.span_years)


def excess_return_level(shape: float, scale: float, rate: float, periods) -> tuple[np.ndarray, np.ndarray]:
    """Excess-scale return levels and a flag for periods floored at zero.

    ``m_T = scale/shape * ((rate*T)**shape - 1)``, ``scale*log(rate*T)`` in the
    exponential limit, and 0 whenever ``rate*T < 1``.
    """
    periods = np.asarray(periods, dtype=float)
    if np.any(periods <= 0):
        raise ValueError("return periods must be positive")
    log_lt = np.log(rate * periods)
    floored = log_lt < 0
    log_lt = np.maximum(log_lt, 0.0)
    if abs(shape) < 1e-6:
        m = scale * log_lt * (1.0 + shape * log_lt / 2)
    else:
        m = scale * np.expm1(shape * log_lt) / shape
    return m, floored


@dataclass(frozen=True)
class ReturnLevelEntry:
    """One row of a return-level table.

    ``ci_lower`` and ``ci_upper`` are the bounds built from the lower and upper
    percentiles of the excess-scale bootstrap distribution. For the high tail
    that is plain numeric order; for the low tail the mapping ``u - m`` flips
    it, so ``ci_lower`` is the larger number. ``ci_min``/``ci_max`` give the
    numeric order either way.
    """

    return_period: float
    return_value: float
    ci_lower: float = math.nan
    ci_upper: float = math.nan
    ci_level: float = math.nan
    floored: bool = False

    @property
    def ci_min(self) -> float:
        return min(self.ci_lower, self.ci_upper)

    @property
    def ci_max(self) -> float:
        return max(self.ci_lower, self.ci_upper)

    @property
    def has_ci(self) -> bool:
        return not (math.isnan(self.ci_lower) or math.isnan(self.ci_upper))


def return_levels(fit: GPDFit, rate: PoissonRate, periods: Sequence[float]) -> list[ReturnLevelEntry]:
    m, floored = excess_return_level(fit.shape, fit.scale, rate.rate, periods)
    x = fit.spec.to_level(m)
    return [
        ReturnLevelEntry(return_period=float(t), return_value=float(v), floored=bool(fl))
        for t, v, fl in zip(periods, x, floored)
    ]


def block_extrema(
    table: TimeSeriesTable,
    block: Literal["year", "month"] = "year",
    kind: Literal["max", "min"] = "max",
) -> list[tuple[str | int, float]]:
    """One extremum of the dependent variable per calendar block present in the data."""
    if len(table) == 0:
        raise EmptyInput("block extrema of an empty table")
    if block == "year":
        keys = table.years()
    elif block == "month":
        keys = table.timestamps.astype("datetime64[M]")
    else:
        raise ValueError(f"unknown block {block!r}")
    reducer = np.max if kind == "max" else np.min if kind == "min" else None
    if reducer is None:
        raise ValueError(f"unknown kind {kind!r}")
    x = table.dependent
    out: list[tuple[str | int, float]] = []
    for key in np.unique(keys):
        label = int(key) if block == "year" else str(key)
        out.append((label, float(reducer(x[keys == key]))))
    return out
