"""Stage orchestration: synthesis, EVA, circumstance analysis, benchmark.

Every stage command recomputes what it needs from the raw inputs (all steps
are deterministic under the configured seed) and writes only its own files,
so running the four stages one after another leaves the same output tree as
a single ``run_all``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import report
from .bench import (
    BenchmarkScoreSeries,
    ComparisonVerdict,
    benchmark_scores,
    compare_cases,
    exceedance_factor,
    extreme_condition_stats,
    historical_share,
)
from .config import RunConfig
from .disc import correlation_delta, classify, resolve_thresholds
from .errors import ComputationError, ExtremeBenchError, ValidationError
from .eva import ExceedanceSet, ThresholdSpec, bootstrap_ci, extract_exceedances, fit_diagnostics, resolve_threshold
from .ingest import TimeSeriesTable, filter_time_window, load_csv
from .report import plots
from .report.document import (
    CaseReport,
    circumstance_document,
    eva_document,
    synthesis_document,
    to_document,
    verdict_section,
)
from .report.jsonio import emit_json_document, num
from .report.tables import benchmark_tables, circumstance_tables, eva_tables, synthesis_tables
from .stats import NormalizationSpec, delta_stats, describe_table, fit_normalization, pearson_matrix

logger = logging.getLogger(__name__)


class Stage(enum.IntEnum):
    SYNTHESIS = 1
    EVA = 2
    CIRCUMSTANCE = 3
    BENCHMARK = 4


class ExitCode(enum.IntEnum):
    OK = 0
    VALIDATION = 1
    COMPUTATION = 2
    PARTIAL = 3


@dataclass
class CaseState:
    case_id: str
    report: CaseReport | None = None
    filtered: TimeSeriesTable | None = None
    extreme_mask: np.ndarray | None = None
    exceedances: ExceedanceSet | None = None
    error: ExtremeBenchError | OSError | None = None
    failed_stage: Stage | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class PipelineResult:
    cases: list[CaseState]
    verdict: ComparisonVerdict | None = None
    verdict_message: str | None = None
    benchmark_error: ExtremeBenchError | None = None
    exit_code: ExitCode = ExitCode.OK
    files: list[Path] = field(default_factory=list)
    normalization: NormalizationSpec | None = None

    @property
    def reports(self) -> dict[str, CaseReport]:
        return {c.case_id: c.report for c in self.cases if c.ok and c.report is not None}

    def error_summary(self) -> list[str]:
        lines = [f"{c.case_id}: {type(c.error).__name__}: {c.error}" for c in self.cases if not c.ok]
        if self.benchmark_error is not None:
            lines.append(f"benchmark: {type(self.benchmark_error).__name__}: {self.benchmark_error}")
        return lines


def _threshold_spec(cfg: RunConfig) -> ThresholdSpec:
    return ThresholdSpec(percentile=cfg.percentile, tail=cfg.tail)  # type: ignore[arg-type]


def _event_groups(table: TimeSeriesTable, mask: np.ndarray) -> list[tuple[int, int, int]]:
    years = table.years()[mask]
    hours = (table.seconds_of_day()[mask] // 3600).astype(int)
    keys, counts = np.unique(np.column_stack([years, hours]), axis=0, return_counts=True) if mask.any() else ([], [])
    return [(int(k[0]), int(k[1]), int(c)) for k, c in zip(keys, counts)]


def _synthesis(state: CaseState, cfg: RunConfig, path: Path) -> None:
    table = load_csv(path, cfg.schema, case_id=state.case_id)
    filtered = filter_time_window(table, cfg.window) if cfg.window is not None else table
    if len(filtered) == 0:
        raise ComputationError(f"case {state.case_id!r}: no rows inside the time window")
    state.filtered = filtered
    state.report = CaseReport(
        case_id=state.case_id,
        rows_total=len(table),
        rows_filtered=len(filtered),
        descriptive=describe_table(filtered),
        physical_floor=cfg.physical_floor,
        config=cfg.to_dict(),
    )


def _eva(state: CaseState, cfg: RunConfig) -> None:
    r, table = state.report, state.filtered
    spec = resolve_threshold(table, _threshold_spec(cfg))
    mask = spec.extreme_mask(table.dependent)
    state.extreme_mask = mask
    r.threshold = spec
    r.n_extreme = int(mask.sum())
    r.event_groups = _event_groups(table, mask)
    exc = extract_exceedances(table, spec)
    state.exceedances = exc
    r.return_table = bootstrap_ci(exc, cfg.return_periods, cfg.ci_level, cfg.n_boot, cfg.seed,
                                  min_excesses=cfg.min_excesses)
    r.diagnostics = fit_diagnostics(exc, r.return_table.fit)


def _circumstance(state: CaseState, cfg: RunConfig) -> None:
    r, table = state.report, state.filtered
    extreme = table.select(state.extreme_mask)
    r.descriptive_extreme = describe_table(extreme)
    # reference is the whole filtered table, so the count delta is extreme minus all rows
    r.delta = delta_stats(r.descriptive_extreme, r.descriptive)
    comps = cfg.schema.companions
    r.correlation_full = pearson_matrix(table, comps)
    r.correlation_extreme = pearson_matrix(extreme, comps)
    r.correlation_delta = correlation_delta(r.correlation_extreme, r.correlation_full)
    r.classification = classify(r.correlation_delta, resolve_thresholds(r.correlation_delta, cfg.q_hi, cfg.q_lo))


def compute(cfg: RunConfig, through: Stage = Stage.BENCHMARK) -> PipelineResult:
    """Run every case through ``through``; a failing case stops, the rest continue."""
    states = [CaseState(c.case_id) for c in cfg.cases]
    steps = [(Stage.SYNTHESIS, None), (Stage.EVA, _eva), (Stage.CIRCUMSTANCE, _circumstance)]
    for state, case in zip(states, cfg.cases):
        for stage, fn in steps:
            if stage > through:
                break
            try:
                if fn is None:
                    _synthesis(state, cfg, case.path)
                else:
                    fn(state, cfg)
            except (ExtremeBenchError, OSError) as e:
                state.error, state.failed_stage = e, stage
                logger.error("case %s failed in %s: %s", state.case_id, stage.name.lower(), e)
                break
    result = PipelineResult(states)
    if through >= Stage.BENCHMARK:
        _benchmark(result, cfg)
    result.exit_code = _exit_code(result)
    return result


def _benchmark(result: PipelineResult, cfg: RunConfig) -> None:
    good = [s for s in result.cases if s.ok]
    if not good:
        return
    try:
        counts = {s.case_id: s.report.n_extreme for s in good}
        shares = historical_share(counts)
        norm = None
        if cfg.normalization != "none":
            # one joint fit so scores stay comparable across cases
            norm = fit_normalization([s.filtered for s in good], cfg.schema.companions, cfg.normalization)
        bcfg = cfg.benchmark_config(norm)
        series: list[BenchmarkScoreSeries] = []
        for s in good:
            spec = s.report.threshold
            s.report.condition_stats = extreme_condition_stats(s.filtered, spec, cfg.statistic)  # type: ignore[arg-type]
            factors = exceedance_factor(s.report.return_table.entries)
            s.report.scores = benchmark_scores(s.report.condition_stats, bcfg, shares[s.case_id], factors, s.case_id)
            series.append(s.report.scores)
        if len(series) >= 2:
            result.verdict = compare_cases(series)
        else:
            result.verdict_message = "single case, no comparison"
        result.normalization = norm
    except ExtremeBenchError as e:
        result.benchmark_error = e
        logger.error("benchmark failed: %s", e)


def _exit_code(result: PipelineResult) -> ExitCode:
    failed = [s for s in result.cases if not s.ok]
    if result.benchmark_error is not None or len(failed) == len(result.cases):
        errors = [s.error for s in failed] + ([result.benchmark_error] if result.benchmark_error else [])
        if errors and all(isinstance(e, ValidationError) for e in errors):
            return ExitCode.VALIDATION
        return ExitCode.COMPUTATION
    return ExitCode.PARTIAL if failed else ExitCode.OK


# ---------------------------------------------------------------- emission


def _case_dir(out: Path, case_id: str) -> Path:
    d = out / case_id
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_stage(result: PipelineResult, cfg: RunConfig, out: Path, stage: Stage) -> list[Path]:
    files: list[Path] = []
    for s in result.cases:
        if s.report is None or (s.failed_stage is not None and s.failed_stage <= stage):
            continue
        d = _case_dir(out, s.case_id)
        r = s.report
        if stage is Stage.SYNTHESIS:
            doc = synthesis_document(r)
            files.append(emit_json_document(doc, d / "step1_synthesis.json"))
            files += synthesis_tables(doc, d)
        elif stage is Stage.EVA:
            doc = eva_document(r)
            files.append(emit_json_document(doc, d / "step2_eva.json"))
            files += eva_tables(doc, d)
            title = f"{s.case_id}: "
            files.append(_svg(plots.return_plot(r.return_table, d / "return_plot.svg", title + "return levels")))
            files.append(_svg(plots.pdf_overlay(s.exceedances, r.return_table, d / "pdf_overlay.svg",
                                                title + "excess distribution")))
            files.append(_svg(plots.event_grouping({s.case_id: r.event_groups}, d / "event_grouping.svg",
                                                   title + "extreme events by year and hour")))
        elif stage is Stage.CIRCUMSTANCE:
            doc = circumstance_document(r)
            files.append(emit_json_document(doc, d / "step3_circumstance.json"))
            files += circumstance_tables(doc, d)
            files.append(_svg(plots.disc_heatmap(r.correlation_delta, r.classification, d / "disc_heatmap.svg",
                                                 f"{s.case_id}: correlation shift under extremes",
                                                 cfg.heatmap_colors)))
        elif stage is Stage.BENCHMARK and r.scores is not None:
            full = to_document(r)
            files += benchmark_tables(full["benchmark"], d)
            files.append(emit_json_document(full, d / "report.json"))
    if stage is Stage.BENCHMARK:
        files += _write_benchmark(result, out)
    return files


def _svg(spec) -> Path:
    report.render_plot(spec)
    return Path(spec.path)


def _write_benchmark(result: PipelineResult, out: Path) -> list[Path]:
    good = [s for s in result.cases if s.ok and s.report is not None and s.report.scores is not None]
    if not good:
        return []
    norm = result.normalization
    doc = {
        "cases": [s.case_id for s in good],
        "event_counts": {s.case_id: s.report.n_extreme for s in good},
        "shares": {s.case_id: s.report.scores.share for s in good},
        "normalization": None if norm is None else {
            "method": norm.method,
            "params": {v: [num(a), num(b)] for v, (a, b) in norm.params.items()},
        },
        "scores": {s.case_id: report.document.scores_section(s.report.scores) for s in good},
        "verdict": verdict_section(result.verdict, result.verdict_message),
    }
    files = [emit_json_document(doc, out / "benchmark.json")]
    files.append(_svg(plots.benchmark_series([s.report.scores for s in good], out / "benchmark_series.svg")))
    files.append(_svg(plots.event_grouping({s.case_id: s.report.event_groups for s in good},
                                           out / "event_grouping.svg")))
    return files


def _write_summary(result: PipelineResult, cfg: RunConfig, out: Path) -> list[Path]:
    doc = {
        "exit_code": int(result.exit_code),
        "cases": [
            {
                "id": s.case_id,
                "status": "ok" if s.ok else "failed",
                "failed_stage": None if s.ok else s.failed_stage.name.lower(),
                "error": None if s.ok else f"{type(s.error).__name__}: {s.error}",
            }
            for s in result.cases
        ],
        "benchmark_error": None if result.benchmark_error is None else str(result.benchmark_error),
    }
    return [
        emit_json_document(cfg.to_dict(), out / "config-resolved.json"),
        emit_json_document(doc, out / "run-summary.json"),
    ]


def run(cfg: RunConfig, out: str | Path, stages: Sequence[Stage]) -> PipelineResult:
    """Compute through the last requested stage and write the requested stages' files."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    result = compute(cfg, max(stages))
    if max(stages) < Stage.BENCHMARK:
        result.exit_code = _exit_code(result)
    for stage in sorted(stages):
        result.files += _write_stage(result, cfg, out, stage)
    result.files += _write_summary(result, cfg, out)
    for line in result.error_summary():
        logger.error(line)
    return result


def run_synthesis(cfg: RunConfig, out: str | Path) -> PipelineResult:
    return run(cfg, out, [Stage.SYNTHESIS])


def run_eva(cfg: RunConfig, out: str | Path) -> PipelineResult:
    return run(cfg, out, [Stage.EVA])


def run_circumstance(cfg: RunConfig, out: str | Path) -> PipelineResult:
    return run(cfg, out, [Stage.CIRCUMSTANCE])


def run_benchmark(cfg: RunConfig, out: str | Path) -> PipelineResult:
    return run(cfg, out, [Stage.BENCHMARK])


def run_all(cfg: RunConfig, out: str | Path) -> PipelineResult:
    return run(cfg, out, list(Stage))
