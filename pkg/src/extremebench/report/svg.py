"""Minimal deterministic SVG charts.

Identical :class:`PlotSpec` input always yields identical bytes: no ids,
timestamps or randomness, and every coordinate is printed with fixed precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from ..errors import EmptySeries

PlotKind = Literal["pdf_overlay", "return_plot", "disc_heatmap", "benchmark_series", "event_grouping"]
Scale = Literal["linear", "log"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")

HEATMAP_COLORS = {"HPC": "#e4572e", "HNC": "#2e86ab", "NotSignificant": "#e6e6e6", "undefined": "#ffffff"}

_FONT = "font-family=\"sans-serif\""


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    style: Literal["line", "markers", "line+markers", "bars"] = "line"
    color: str | None = None
    dash: str | None = None


@dataclass
class Band:
    label: str
    x: Sequence[float]
    lo: Sequence[float]
    hi: Sequence[float]
    color: str | None = None


@dataclass
class Heatmap:
    variables: Sequence[str]
    values: np.ndarray  # annotated numbers, NaN for undefined
    categories: Sequence[Sequence[str]]
    colors: Mapping[str, str] = field(default_factory=lambda: dict(HEATMAP_COLORS))


@dataclass
class PlotSpec:
    kind: PlotKind
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    x_scale: Scale = "linear"
    y_scale: Scale = "linear"
    series: list[Series] = field(default_factory=list)
    bands: list[Band] = field(default_factory=list)
    heatmap: Heatmap | None = None
    x_tick_labels: Sequence[str] | None = None
    width: int = 720
    height: int = 480
    path: str | Path | None = None

    def __post_init__(self) -> None:
        if self.kind == "benchmark_series":
            self.x_scale = "log"


def fmt(v: float) -> str:
    """Coordinate formatting: two decimals, no negative zero."""
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def tick_label(v: float) -> str:
    if v == 0:
        return "0"
    a = abs(v)
    if a >= 1e5 or a < 1e-3:
        return f"{v:.0e}".replace("e+0", "e").replace("e-0", "e-")
    return f"{v:.4g}"


def nice_step(span: float, target: int = 6) -> float:
    raw = span / max(target, 1)
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def linear_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    step = nice_step(hi - lo, target)
    start = math.ceil(lo / step - 1e-9)
    ticks = []
    k = start
    while k * step <= hi + 1e-9 * step:
        ticks.append(round(k * step, 12))
        k += 1
    return ticks


def log_ticks(lo: float, hi: float) -> tuple[list[float], list[float]]:
    """Decade ticks plus 2 and 5 subticks within ``[lo, hi]``."""
    majors, minors = [], []
    for e in range(math.floor(math.log10(lo)) - 1, math.ceil(math.log10(hi)) + 1):
        for m in (1, 2, 5):
            v = m * 10.0**e
            if lo * (1 - 1e-12) <= v <= hi * (1 + 1e-12):
                (majors if m == 1 else minors).append(v)
    return majors, minors


class Axis:
    def __init__(self, lo: float, hi: float, p0: float, p1: float, scale: Scale) -> None:
        self.lo, self.hi, self.p0, self.p1, self.scale = lo, hi, p0, p1, scale

    def __call__(self, v: float) -> float:
        if self.scale == "log":
            a, b, x = math.log10(self.lo), math.log10(self.hi), math.log10(v)
        else:
            a, b, x = self.lo, self.hi, v
        return self.p0 + (x - a) / (b - a) * (self.p1 - self.p0)

    def ticks(self) -> list[tuple[float, bool]]:
        """``(value, labelled)`` pairs."""
        if self.scale == "log":
            majors, minors = log_ticks(self.lo, self.hi)
            decades = math.log10(self.hi / self.lo)
            label_minor = decades <= 3 or not majors
            return sorted([(v, True) for v in majors] + [(v, label_minor) for v in minors])
        return [(v, True) for v in linear_ticks(self.lo, self.hi)]


def _auto_range(values: np.ndarray, scale: Scale, pad: float = 0.05) -> tuple[float, float]:
    v = values[np.isfinite(values)]
    if scale == "log":
        v = v[v > 0]
        if v.size == 0:
            return 1.0, 10.0
        lo, hi = float(v.min()), float(v.max())
        if lo == hi:
            return lo / 2, hi * 2
        span = math.log10(hi / lo)
        return lo / 10 ** (pad * span), hi * 10 ** (pad * span)
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        d = abs(lo) * 0.1 or 1.0
        return lo - d, hi + d
    d = (hi - lo) * pad
    return lo - d, hi + d


def _color(i: int, explicit: str | None) -> str:
    return explicit or PALETTE[i % len(PALETTE)]


class _Doc:
    def __init__(self, width: int, height: int, scales: tuple[str, str] | None = None) -> None:
        # axis scales go on the root element so readers can check them without parsing geometry
        attrs = f' data-x-scale="{scales[0]}" data-y-scale="{scales[1]}"' if scales else ""
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}"{attrs}>',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        ]

    def add(self, s: str) -> None:
        self.parts.append(s)

    def text(self, x: float, y: float, s: str, size: int = 12, anchor: str = "middle", rotate: float | None = None,
             weight: str | None = None) -> None:
        extra = f' transform="rotate({fmt(rotate)} {fmt(x)} {fmt(y)})"' if rotate is not None else ""
        w = f' font-weight="{weight}"' if weight else ""
        self.add(f'<text x="{fmt(x)}" y="{fmt(y)}" {_FONT} font-size="{size}" text-anchor="{anchor}"{w}{extra}>'
                 f"{escape(s)}</text>")

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _render_xy(spec: PlotSpec) -> str:
    xs = [np.asarray(s.x, float) for s in spec.series] + [np.asarray(b.x, float) for b in spec.bands]
    ys = [np.asarray(s.y, float) for s in spec.series]
    ys += [np.asarray(b.lo, float) for b in spec.bands] + [np.asarray(b.hi, float) for b in spec.bands]
    if not any(a.size for a in xs):
        raise EmptySeries(f"{spec.kind}: nothing to draw")
    has_bars = any(s.style == "bars" for s in spec.series)
    allx = np.concatenate(xs)
    ally = np.concatenate(ys)
    if has_bars and spec.y_scale == "linear":
        ally = np.concatenate([ally, [0.0]])
    xlo, xhi = _auto_range(allx, spec.x_scale, pad=0.08 if has_bars else 0.05)
    ylo, yhi = _auto_range(ally, spec.y_scale)
    if has_bars and spec.y_scale == "linear" and np.nanmin(ally) >= 0:
        ylo = 0.0

    W, H = spec.width, spec.height
    left, right, top = 72, 24, 40
    n_legend = len(spec.series) + len(spec.bands)
    bottom = 56 + 18 * ((n_legend + 2) // 3)
    ax = Axis(xlo, xhi, left, W - right, spec.x_scale)
    ay = Axis(ylo, yhi, H - bottom, top, spec.y_scale)
    doc = _Doc(W, H, (spec.x_scale, spec.y_scale))
    if spec.title:
        doc.text(W / 2, 22, spec.title, size=15, weight="bold")

    # grid, ticks and labels
    tick_items = ax.ticks()
    if spec.x_tick_labels is not None:
        tick_items = [(float(i), True) for i in range(len(spec.x_tick_labels)) if xlo <= i <= xhi]
    for v, labelled in tick_items:
        px = ax(v)
        doc.add(f'<line x1="{fmt(px)}" y1="{fmt(top)}" x2="{fmt(px)}" y2="{fmt(H - bottom)}" '
                f'stroke="#eeeeee" stroke-width="1"/>')
        doc.add(f'<line x1="{fmt(px)}" y1="{fmt(H - bottom)}" x2="{fmt(px)}" y2="{fmt(H - bottom + 5)}" '
                f'stroke="#333333" stroke-width="1"/>')
        if labelled:
            label = spec.x_tick_labels[int(v)] if spec.x_tick_labels is not None else tick_label(v)
            doc.text(px, H - bottom + 18, label, size=11)
    for v, labelled in ay.ticks():
        py = ay(v)
        doc.add(f'<line x1="{fmt(left)}" y1="{fmt(py)}" x2="{fmt(W - right)}" y2="{fmt(py)}" '
                f'stroke="#eeeeee" stroke-width="1"/>')
        doc.add(f'<line x1="{fmt(left - 5)}" y1="{fmt(py)}" x2="{fmt(left)}" y2="{fmt(py)}" '
                f'stroke="#333333" stroke-width="1"/>')
        if labelled:
            doc.text(left - 8, py + 4, tick_label(v), size=11, anchor="end")
    doc.add(f'<rect x="{fmt(left)}" y="{fmt(top)}" width="{fmt(W - right - left)}" height="{fmt(H - bottom - top)}" '
            f'fill="none" stroke="#333333" stroke-width="1"/>')
    if spec.x_label:
        doc.text((left + W - right) / 2, H - bottom + 38, spec.x_label, size=12)
    if spec.y_label:
        doc.text(18, (top + H - bottom) / 2, spec.y_label, size=12, rotate=-90)

    legend: list[tuple[str, str, str]] = []
    ci = 0
    for b in spec.bands:
        color = _color(ci, b.color)
        ci += 1
        pts = [(ax(x), ay(y)) for x, y in zip(b.x, b.hi) if _plottable(x, y, spec)]
        pts += [(ax(x), ay(y)) for x, y in reversed(list(zip(b.x, b.lo))) if _plottable(x, y, spec)]
        if pts:
            doc.add(f'<polygon points="{" ".join(f"{fmt(px)},{fmt(py)}" for px, py in pts)}" '
                    f'fill={quoteattr(color)} fill-opacity="0.2" stroke="none"/>')
        legend.append((b.label, color, "band"))

    bar_series = [s for s in spec.series if s.style == "bars"]
    bar_slot = _bar_width(bar_series, ax)
    for s in spec.series:
        color = _color(ci, s.color)
        ci += 1
        pts = [(ax(x), ay(y)) for x, y in zip(s.x, s.y) if _plottable(x, y, spec)]
        if s.style == "bars":
            k = bar_series.index(s)
            w = bar_slot / max(len(bar_series), 1)
            base = ay(max(ylo, 0.0)) if spec.y_scale == "linear" else ay(ylo)
            for px, py in pts:
                x0 = px - bar_slot / 2 + k * w
                doc.add(f'<rect x="{fmt(x0)}" y="{fmt(min(py, base))}" width="{fmt(w * 0.92)}" '
                        f'height="{fmt(abs(base - py))}" fill={quoteattr(color)} fill-opacity="0.6"/>')
        if "line" in s.style and len(pts) > 1:
            dash = f' stroke-dasharray={quoteattr(s.dash)}' if s.dash else ""
            doc.add(f'<polyline points="{" ".join(f"{fmt(px)},{fmt(py)}" for px, py in pts)}" fill="none" '
                    f'stroke={quoteattr(color)} stroke-width="2"{dash}/>')
        if "markers" in s.style or (s.style == "line" and len(pts) == 1):
            for px, py in pts:
                doc.add(f'<circle cx="{fmt(px)}" cy="{fmt(py)}" r="3.5" fill={quoteattr(color)}/>')
        legend.append((s.label, color, s.style if not s.dash else "dash"))

    for i, (label, color, style) in enumerate(legend):
        col, row = i % 3, i // 3
        lx = left + col * (W - left - right) / 3
        ly = H - bottom + 58 + row * 18
        if style == "band":
            doc.add(f'<rect x="{fmt(lx)}" y="{fmt(ly - 9)}" width="18" height="10" fill={quoteattr(color)} '
                    f'fill-opacity="0.2"/>')
        elif style == "bars":
            doc.add(f'<rect x="{fmt(lx)}" y="{fmt(ly - 9)}" width="18" height="10" fill={quoteattr(color)} '
                    f'fill-opacity="0.6"/>')
        else:
            dash = ' stroke-dasharray="6 3"' if style == "dash" else ""
            doc.add(f'<line x1="{fmt(lx)}" y1="{fmt(ly - 4)}" x2="{fmt(lx + 18)}" y2="{fmt(ly - 4)}" '
                    f'stroke={quoteattr(color)} stroke-width="2"{dash}/>')
        doc.text(lx + 24, ly, label, size=11, anchor="start")
    return doc.finish()


def _plottable(x: float, y: float, spec: PlotSpec) -> bool:
    if not (math.isfinite(x) and math.isfinite(y)):
        return False
    if spec.x_scale == "log" and x <= 0:
        return False
    if spec.y_scale == "log" and y <= 0:
        return False
    return True


def _bar_width(bars: Sequence[Series], ax: Axis) -> float:
    xs = sorted({float(x) for s in bars for x in s.x if math.isfinite(x)})
    if len(xs) < 2:
        return 40.0
    gaps = [ax(b) - ax(a) for a, b in zip(xs, xs[1:])]
    return max(2.0, min(gaps) * 0.85)


def _render_heatmap(spec: PlotSpec) -> str:
    hm = spec.heatmap
    if hm is None or len(hm.variables) == 0:
        raise EmptySeries("disc_heatmap: no matrix to draw")
    k = len(hm.variables)
    longest = max(len(v) for v in hm.variables)
    left = 24 + 7 * longest
    top = 48 + 7 * longest
    legend_h = 40
    cell = max(28.0, min(72.0, (min(spec.width - left - 24, spec.height - top - legend_h - 16)) / k))
    W = int(max(spec.width, left + cell * k + 24))
    H = int(max(spec.height, top + cell * k + legend_h + 16))
    doc = _Doc(W, H)
    if spec.title:
        doc.text(W / 2, 22, spec.title, size=15, weight="bold")
    vals = np.asarray(hm.values, dtype=float)
    for i in range(k):
        doc.text(left - 6, top + (i + 0.5) * cell + 4, hm.variables[i], size=11, anchor="end")
        x = left + (i + 0.5) * cell
        doc.text(x, top - 6, hm.variables[i], size=11, anchor="start", rotate=-45)
        for j in range(k):
            cat = hm.categories[i][j]
            v = vals[i, j]
            key = "undefined" if math.isnan(v) else cat
            color = hm.colors.get(key, hm.colors.get("NotSignificant", "#e6e6e6"))
            cx, cy = left + j * cell, top + i * cell
            doc.add(f'<rect x="{fmt(cx)}" y="{fmt(cy)}" width="{fmt(cell)}" height="{fmt(cell)}" '
                    f'fill={quoteattr(color)} stroke="#ffffff" stroke-width="1"/>')
            label = "n/a" if math.isnan(v) else f"{v:.2f}".replace("-0.00", "0.00")
            doc.text(cx + cell / 2, cy + cell / 2 + 4, label, size=10)
    ly = top + k * cell + 26
    for n, key in enumerate(("HPC", "HNC", "NotSignificant")):
        lx = left + n * 140
        doc.add(f'<rect x="{fmt(lx)}" y="{fmt(ly - 10)}" width="14" height="14" '
                f'fill={quoteattr(hm.colors.get(key, "#cccccc"))} stroke="#999999" stroke-width="0.5"/>')
        doc.text(lx + 20, ly + 1, key, size=11, anchor="start")
    return doc.finish()


def render_plot(spec: PlotSpec) -> str:
    """Render ``spec`` to an SVG string, writing it to ``spec.path`` when set."""
    if spec.kind == "disc_heatmap":
        svg = _render_heatmap(spec)
    else:
        if not spec.series and not spec.bands:
            raise EmptySeries(f"{spec.kind}: no series")
        svg = _render_xy(spec)
    if spec.path is not None:
        Path(spec.path).write_text(svg, encoding="utf-8")
    return svg
