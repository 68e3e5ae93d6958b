"""CaseReport and its conversion to a JSON-ready document.

Section builders are shared by the per-stage files and the full report so
the same value always serializes the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from ..bench import BenchmarkScoreSeries, ComparisonVerdict, ExtremeConditionStats
from ..disc import CorrelationDelta, DISCClassification, Label
from ..eva.bootstrap import ReturnLevelTable
from ..eva.diagnostics import FitDiagnostics
from ..eva.pot import ThresholdSpec
from ..stats import STAT_NAMES, CorrelationMatrix, DescriptiveStats
from .jsonio import Undefined, num

ZERO_VARIANCE = "zero variance"


@dataclass
class CaseReport:
    """Everything produced for one case; sections stay ``None`` until their stage runs."""

    case_id: str
    rows_total: int
    rows_filtered: int
    descriptive: Mapping[str, DescriptiveStats]
    descriptive_extreme: Mapping[str, DescriptiveStats] | None = None
    delta: Mapping[str, Mapping[str, float]] | None = None
    threshold: ThresholdSpec | None = None
    n_extreme: int | None = None
    event_groups: Sequence[tuple[int, int, int]] | None = None
    return_table: ReturnLevelTable | None = None
    diagnostics: FitDiagnostics | None = None
    correlation_full: CorrelationMatrix | None = None
    correlation_extreme: CorrelationMatrix | None = None
    correlation_delta: CorrelationDelta | None = None
    classification: DISCClassification | None = None
    condition_stats: ExtremeConditionStats | None = None
    scores: BenchmarkScoreSeries | None = None
    physical_floor: float | None = None
    config: Mapping[str, Any] = field(default_factory=dict)


def stats_table(stats: Mapping[str, DescriptiveStats]) -> dict:
    out = {}
    for var, s in stats.items():
        d = s.as_dict()
        out[var] = {k: num(d[k], "empty partition") if k != "count" else int(d[k]) for k in STAT_NAMES}
    return out


def delta_table(delta: Mapping[str, Mapping[str, float]]) -> dict:
    return {var: {k: num(v, "empty partition") for k, v in row.items()} for var, row in delta.items()}


def threshold_section(spec: ThresholdSpec, n_extreme: int) -> dict:
    return {
        "percentile": spec.percentile,
        "tail": spec.tail,
        "quantile_level": spec.quantile_level,
        "threshold": num(spec.threshold),
        "n_extreme": int(n_extreme),
    }


def event_groups_section(groups: Sequence[tuple[int, int, int]]) -> list:
    return [{"year": int(y), "hour": int(h), "count": int(c)} for y, h, c in groups]


def return_table_section(table: ReturnLevelTable, physical_floor: float | None = None) -> dict:
    entries = []
    for e in table.entries:
        row = {
            "return_period": e.return_period,
            "return_value": num(e.return_value),
            "ci_lower": num(e.ci_lower, "bootstrap failed"),
            "ci_upper": num(e.ci_upper, "bootstrap failed"),
            "ci_min": num(e.ci_min, "bootstrap failed"),
            "ci_max": num(e.ci_max, "bootstrap failed"),
            "floored": bool(e.floored),
        }
        if physical_floor is not None:
            below = [name for name, v in (("return_value", e.return_value), ("ci_lower", e.ci_lower),
                                          ("ci_upper", e.ci_upper)) if v < physical_floor]
            row["physical_floor"] = below
        entries.append(row)
    fit = table.fit
    return {
        "fit": {
            "shape": fit.shape,
            "scale": fit.scale,
            "threshold": fit.threshold,
            "tail": fit.tail,
            "n_excesses": fit.n_excesses,
            "log_likelihood": num(fit.log_likelihood),
            "start_log_likelihood": num(fit.start_log_likelihood),
            "iterations": fit.iterations,
        },
        "rate_per_year": table.rate.rate,
        "ci_level": table.ci_level,
        "n_boot": table.n_boot,
        "seed": table.seed,
        "n_failed": table.n_failed,
        "unstable": table.unstable,
        "physical_floor": physical_floor,
        "entries": entries,
    }


def diagnostics_section(d: FitDiagnostics) -> dict:
    return {
        "r_squared": num(d.r_squared),
        "p_value": num(d.p_value),
        "slope": num(d.slope, "degenerate quantiles"),
        "intercept": num(d.intercept, "degenerate quantiles"),
    }


def matrix_rows(values: np.ndarray, reason: str = ZERO_VARIANCE) -> list:
    return [[num(v, reason) for v in row] for row in np.asarray(values, dtype=float)]


def correlation_section(m: CorrelationMatrix) -> dict:
    return {"variables": list(m.variables), "entries": matrix_rows(m.entries)}


def disc_section(delta: CorrelationDelta, cls: DISCClassification) -> dict:
    t = cls.thresholds
    return {
        "variables": list(delta.variables),
        "q_hi": t.q_hi,
        "q_lo": t.q_lo,
        "p_hi": num(t.p_hi),
        "p_lo": num(t.p_lo),
        "delta": matrix_rows(delta.delta),
        "labels": cls.as_strings(),
        "hpc_pairs": [list(p) for p in cls.pairs(Label.HPC)],
        "hnc_pairs": [list(p) for p in cls.pairs(Label.HNC)],
    }


def condition_section(s: ExtremeConditionStats) -> dict:
    return {
        "statistic": s.statistic,
        "n_extreme": s.n_extreme,
        "n_normal": s.n_normal,
        "normal_empty": s.normal_empty,
        "extreme": {k: num(v) for k, v in s.extreme.items()},
        "normal": {k: num(v, "empty partition") for k, v in s.normal.items()},
    }


def scores_section(s: BenchmarkScoreSeries) -> dict:
    return {
        "share": s.share,
        "weighted_sum": s.weighted_sum,
        "contributions": {k: num(v) for k, v in s.contributions.items()},
        "periods": list(s.periods),
        "rv": [num(v) for v in s.rv],
        "lower": [num(v) for v in s.lower],
        "upper": [num(v) for v in s.upper],
    }


def verdict_section(v: ComparisonVerdict | None, message: str | None = None) -> dict:
    if v is None:
        return {"message": message or "single case, no comparison", "most_sensitive": None, "tie": False}
    return {
        "message": v.message,
        "most_sensitive": v.most_sensitive,
        "tie": v.tie,
        "crossing": v.crossing,
        "overall_ranking": list(v.overall_ranking),
        "mean_scores": {k: num(x) for k, x in v.mean_scores.items()},
        "rankings": [{"period": t, "ranking": list(r), "tie": tie}
                     for t, r, tie in zip(v.periods, v.rankings, v.ties)],
    }


def synthesis_document(r: CaseReport) -> dict:
    return {
        "case_id": r.case_id,
        "rows_total": r.rows_total,
        "rows_filtered": r.rows_filtered,
        "descriptive": stats_table(r.descriptive),
    }


def eva_document(r: CaseReport) -> dict:
    doc: dict[str, Any] = {"case_id": r.case_id}
    if r.threshold is not None:
        doc["threshold"] = threshold_section(r.threshold, r.n_extreme or 0)
    if r.event_groups is not None:
        doc["event_groups"] = event_groups_section(r.event_groups)
    if r.return_table is not None:
        doc["return_levels"] = return_table_section(r.return_table, r.physical_floor)
    if r.diagnostics is not None:
        doc["diagnostics"] = diagnostics_section(r.diagnostics)
    return doc


def circumstance_document(r: CaseReport) -> dict:
    doc: dict[str, Any] = {"case_id": r.case_id}
    if r.descriptive_extreme is not None:
        doc["descriptive_extreme"] = stats_table(r.descriptive_extreme)
    if r.delta is not None:
        doc["delta"] = delta_table(r.delta)
    if r.correlation_full is not None:
        doc["correlation_full"] = correlation_section(r.correlation_full)
    if r.correlation_extreme is not None:
        doc["correlation_extreme"] = correlation_section(r.correlation_extreme)
    if r.correlation_delta is not None and r.classification is not None:
        doc["disc"] = disc_section(r.correlation_delta, r.classification)
    return doc


def to_document(r: CaseReport) -> dict:
    """Full nested document for one case; absent sections are omitted."""
    doc: dict[str, Any] = {"case_id": r.case_id, "config": dict(r.config)}
    doc["synthesis"] = {k: v for k, v in synthesis_document(r).items() if k != "case_id"}
    eva = {k: v for k, v in eva_document(r).items() if k != "case_id"}
    if eva:
        doc["eva"] = eva
    circ = {k: v for k, v in circumstance_document(r).items() if k != "case_id"}
    if circ:
        doc["circumstance"] = circ
    bench: dict[str, Any] = {}
    if r.condition_stats is not None:
        bench["condition_stats"] = condition_section(r.condition_stats)
    if r.scores is not None:
        bench["scores"] = scores_section(r.scores)
    if bench:
        doc["benchmark"] = bench
    return doc


def is_undefined(v: Any) -> bool:
    return isinstance(v, Undefined) or (isinstance(v, dict) and set(v) == {"value", "reason"} and v["value"] is None)


def value_of(v: Any) -> float:
    """Numeric value of a document entry; NaN for an undefined marker."""
    if is_undefined(v):
        return math.nan
    return float(v)
