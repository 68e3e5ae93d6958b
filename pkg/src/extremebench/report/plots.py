"""PlotSpec builders for the standard result figures."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..bench import BenchmarkScoreSeries
from ..disc import CorrelationDelta, DISCClassification
from ..eva import gpd
from ..eva.bootstrap import ReturnLevelTable
from ..eva.pot import ExceedanceSet
from .svg import HEATMAP_COLORS, PALETTE, Band, Heatmap, PlotSpec, Series

_BOUND_DASH = {"rv": None, "lower": "6 3", "upper": "2 3"}


def pdf_overlay(exc: ExceedanceSet, table: ReturnLevelTable, path: str | Path | None = None,
                title: str = "", bins: int = 30) -> PlotSpec:
    """Histogram density of the excesses with the fitted GPD density on top."""
    y = exc.excesses
    counts, edges = np.histogram(y, bins=bins)
    widths = np.diff(edges)
    density = counts / (y.size * widths)
    centers = (edges[:-1] + edges[1:]) / 2
    grid = np.linspace(edges[0], edges[-1], 200)
    fit = table.fit
    dens = gpd.pdf(grid, fit.shape, fit.scale)
    return PlotSpec(
        kind="pdf_overlay",
        title=title or "Excess distribution and fitted GPD",
        x_label="excess beyond threshold",
        y_label="density",
        series=[
            Series("empirical", centers, density, style="bars"),
            Series(f"GPD shape={fit.shape:.3f} scale={fit.scale:.3g}", grid, dens, style="line"),
        ],
        path=path,
    )


def return_plot(table: ReturnLevelTable, path: str | Path | None = None, title: str = "") -> PlotSpec:
    t = [e.return_period for e in table.entries]
    band = Band(f"{table.ci_level:.0%} CI", t, [e.ci_min for e in table.entries], [e.ci_max for e in table.entries])
    return PlotSpec(
        kind="return_plot",
        title=title or "Return levels",
        x_label="return period (years)",
        y_label="return value",
        x_scale="log",
        bands=[band],
        series=[Series("return value", t, [e.return_value for e in table.entries], style="line+markers")],
        path=path,
    )


def disc_heatmap(delta: CorrelationDelta, cls: DISCClassification, path: str | Path | None = None,
                 title: str = "", colors: Mapping[str, str] | None = None) -> PlotSpec:
    palette = dict(HEATMAP_COLORS)
    if colors:
        palette.update(colors)
    return PlotSpec(
        kind="disc_heatmap",
        title=title or "Correlation shift under extremes",
        heatmap=Heatmap(list(delta.variables), np.asarray(delta.delta), cls.as_strings(), palette),
        path=path,
    )


def benchmark_series(series: Sequence[BenchmarkScoreSeries], path: str | Path | None = None,
                     title: str = "") -> PlotSpec:
    """Three curves per case on log-x: return value, lower and upper bound."""
    curves = []
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        for b in ("rv", "lower", "upper"):
            curves.append(Series(f"{s.case_id} {b}", s.periods, s.bound(b), style="line+markers",
                                 color=color, dash=_BOUND_DASH[b]))
    return PlotSpec(
        kind="benchmark_series",
        title=title or "Benchmark score by return period",
        x_label="return period (years)",
        y_label="score",
        x_scale="log",
        series=curves,
        path=path,
    )


def event_grouping(groups: Mapping[str, Sequence[tuple[int, int, int]]], path: str | Path | None = None,
                   title: str = "") -> PlotSpec:
    """Extreme-event counts by (year, hour), one bar group per case."""
    keys = sorted({(y, h) for g in groups.values() for y, h, _ in g})
    index = {k: i for i, k in enumerate(keys)}
    series = []
    for case, g in groups.items():
        counts = np.zeros(len(keys))
        for y, h, c in g:
            counts[index[(y, h)]] = c
        series.append(Series(case, np.arange(len(keys), dtype=float), counts, style="bars"))
    return PlotSpec(
        kind="event_grouping",
        title=title or "Extreme events by year and hour",
        x_label="year, hour",
        y_label="events",
        series=series,
        x_tick_labels=[f"{y} {h:02d}h" for y, h in keys],
        width=max(720, 60 * len(keys) + 120),
        path=path,
    )
