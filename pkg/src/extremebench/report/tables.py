"""CSV tables written from the same document that feeds the JSON report."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Iterable, Sequence

from ..stats import STAT_NAMES
from .document import CaseReport, is_undefined, to_document
from .jsonio import Undefined, format_real

RETURN_HEADER = ("Return Period", "Return Value", "Lower CI", "Upper CI")
SCORE_HEADER = ("T", "B_rv", "B_lower", "B_upper")


def cell(v: Any) -> str:
    """CSV text for a document value; undefined entries become empty cells."""
    if v is None or is_undefined(v) or isinstance(v, Undefined):
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_real(v)
    return str(v)


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([cell(v) for v in row])
    return path


def stats_csv(path: Path, table: dict) -> Path:
    return write_rows(path, ("variable", *STAT_NAMES), ([var, *(row[k] for k in STAT_NAMES)] for var, row in table.items()))


def delta_csv(path: Path, table: dict) -> Path:
    return write_rows(path, ("variable", *STAT_NAMES), ([var, *(row.get(k) for k in STAT_NAMES)] for var, row in table.items()))


def return_levels_csv(path: Path, section: dict) -> Path:
    rows = [[e["return_period"], e["return_value"], e["ci_lower"], e["ci_upper"]] for e in section["entries"]]
    return write_rows(path, RETURN_HEADER, rows)


def matrix_csv(path: Path, variables: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    """Square table with variable names as header row and first column."""
    return write_rows(path, ("", *variables), ([v, *r] for v, r in zip(variables, rows)))


def scores_csv(path: Path, section: dict) -> Path:
    rows = zip(section["periods"], section["rv"], section["lower"], section["upper"])
    return write_rows(path, SCORE_HEADER, rows)


def event_groups_csv(path: Path, groups: list) -> Path:
    return write_rows(path, ("year", "hour", "count"), ([g["year"], g["hour"], g["count"]] for g in groups))


def synthesis_tables(doc: dict, out: Path) -> list[Path]:
    return [stats_csv(out / "descriptive.csv", doc["descriptive"])]


def eva_tables(doc: dict, out: Path) -> list[Path]:
    paths = []
    if "event_groups" in doc:
        paths.append(event_groups_csv(out / "event_grouping.csv", doc["event_groups"]))
    if "return_levels" in doc:
        paths.append(return_levels_csv(out / "return_levels.csv", doc["return_levels"]))
    return paths


def circumstance_tables(doc: dict, out: Path) -> list[Path]:
    paths = []
    if "descriptive_extreme" in doc:
        paths.append(stats_csv(out / "descriptive_extreme.csv", doc["descriptive_extreme"]))
    if "delta" in doc:
        paths.append(delta_csv(out / "delta.csv", doc["delta"]))
    for key in ("correlation_full", "correlation_extreme"):
        if key in doc:
            paths.append(matrix_csv(out / f"{key}.csv", doc[key]["variables"], doc[key]["entries"]))
    if "disc" in doc:
        d = doc["disc"]
        paths.append(matrix_csv(out / "disc_delta.csv", d["variables"], d["delta"]))
        paths.append(matrix_csv(out / "disc_matrix.csv", d["variables"], d["labels"]))
    return paths


def benchmark_tables(doc: dict, out: Path) -> list[Path]:
    if "scores" not in doc:
        return []
    return [scores_csv(out / "scores.csv", doc["scores"])]


def emit_csv_tables(report: CaseReport | dict, directory: str | Path) -> list[Path]:
    """One CSV per table present in the report."""
    doc = to_document(report) if isinstance(report, CaseReport) else report
    out = Path(directory)
    paths = synthesis_tables(doc["synthesis"], out)
    paths += eva_tables(doc.get("eva", {}), out)
    paths += circumstance_tables(doc.get("circumstance", {}), out)
    paths += benchmark_tables(doc.get("benchmark", {}), out)
    return paths
