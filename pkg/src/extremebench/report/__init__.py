"""Serialization of results to JSON and CSV, and SVG rendering of plots."""

from pathlib import Path

from .document import CaseReport, to_document
from .jsonio import Undefined, dumps, emit_json_document, load_json, num
from .svg import Band, Heatmap, PlotSpec, Series, render_plot
from .tables import RETURN_HEADER, SCORE_HEADER, emit_csv_tables


def emit_json(report: CaseReport, path: str | Path) -> Path:
    """Write the full case document as one JSON file."""
    return emit_json_document(to_document(report), path)


__all__ = [
    "RETURN_HEADER",
    "SCORE_HEADER",
    "Band",
    "CaseReport",
    "Heatmap",
    "PlotSpec",
    "Series",
    "Undefined",
    "dumps",
    "emit_csv_tables",
    "emit_json",
    "emit_json_document",
    "load_json",
    "num",
    "render_plot",
    "to_document",
]
