"""Descriptive statistics, scenario deltas, Pearson correlation and normalization.

Spread is measured with the population convention (divide by ``n``) everywhere,
and percentiles interpolate linearly between order statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import DegenerateInput, DegenerateRange, EmptyInput, VariableMismatch, ZeroVariance
from .ingest import TimeSeriesTable

__all__ = [
    "percentile",
    "DescriptiveStats",
    "descriptive_stats",
    "describe_table",
    "delta_stats",
    "CorrelationMatrix",
    "pearson_matrix",
    "NormalizationSpec",
    "fit_normalization",
    "normalize",
    "denormalize",
    "ShapeStats",
    "shape_stats",
]

STAT_NAMES = ("count", "mean", "std", "min", "p25", "median", "p75", "max")


def percentile(values, q):
    """Percentile(s) ``q`` in [0, 100] with linear interpolation between closest ranks."""
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        raise EmptyInput("percentile of an empty sequence")
    return np.percentile(a, q, method="linear")


@dataclass(frozen=True)
class DescriptiveStats:
    count: int
    mean: float
    std: float
    min: float
    p25: float
    median: float
    p75: float
    max: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def descriptive_stats(values: Sequence[float] | np.ndarray) -> DescriptiveStats:
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        raise EmptyInput("descriptive statistics of an empty sequence")
    p25, med, p75 = (float(x) for x in percentile(a, [25, 50, 75]))
    return DescriptiveStats(
        count=int(a.size),
        mean=float(a.mean()),
        std=float(a.std()),
        min=float(a.min()),
        p25=p25,
        median=med,
        p75=p75,
        max=float(a.max()),
    )


def describe_table(table: TimeSeriesTable, variables: Sequence[str] | None = None) -> dict[str, DescriptiveStats]:
    variables = table.schema.variables if variables is None else variables
    return {v: descriptive_stats(table.column(v)) for v in variables}


def delta_stats(
    extreme: Mapping[str, DescriptiveStats], normal: Mapping[str, DescriptiveStats]
) -> dict[str, dict[str, float]]:
    """Per variable and statistic, ``extreme - normal``.

    The count delta is included and is negative whenever the extreme scenario
    holds fewer rows.
    """
    if set(extreme) != set(normal):
        raise VariableMismatch(f"variables differ: {sorted(set(extreme) ^ set(normal))}")
    out: dict[str, dict[str, float]] = {}
    for var in extreme:
        x, y = extreme[var].as_dict(), normal[var].as_dict()
        out[var] = {k: x[k] - y[k] for k in STAT_NAMES if k in x and k in y}
    return out


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Pearson correlations; entries involving a constant variable are NaN (undefined)."""

    variables: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        m = np.array(self.entries, dtype=float)
        k = len(self.variables)
        if m.shape != (k, k):
            raise VariableMismatch(f"matrix shape {m.shape} does not match {k} variables")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def undefined(self) -> np.ndarray:
        return np.isnan(self.entries)

    def get(self, a: str, b: str) -> float:
        return float(self.entries[self.variables.index(a), self.variables.index(b)])


def _pearson(x: np.ndarray) -> np.ndarray:
    n, k = x.shape
    mu = x.mean(axis=0)
    d = x - mu
    cov = (d.T @ d) / n
    sd = np.sqrt(np.diag(cov))
    ok = (np.ptp(x, axis=0) > 0) & (sd > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = cov / np.outer(sd, sd)
    r[~ok, :] = np.nan
    r[:, ~ok] = np.nan
    # rounding can push |r| a hair above 1; anything larger is a bug
    excess = np.nanmax(np.abs(r)) - 1.0 if np.any(ok) else 0.0
    assert not excess > 1e-9, f"correlation magnitude exceeds 1 by {excess}"
    r = np.clip(r, -1.0, 1.0)
    r = (r + r.T) / 2
    idx = np.flatnonzero(ok)
    r[idx, idx] = 1.0
    return r


def pearson_matrix(table: TimeSeriesTable, variables: Sequence[str], *, strict: bool = False) -> CorrelationMatrix:
    """Pairwise Pearson correlations with population covariance and standard deviations.

    A constant variable yields NaN in its row and column. Pass ``strict=True``
    to raise :class:`ZeroVariance` instead.
    """
    variables = tuple(variables)
    if len(table) < 2:
        raise EmptyInput(f"correlation needs at least 2 rows, got {len(table)}")
    r = _pearson(table.matrix(variables))
    if strict and np.isnan(r).any():
        bad = [v for i, v in enumerate(variables) if np.isnan(r[i, i])]
        raise ZeroVariance(f"constant variables: {bad}")
    return CorrelationMatrix(variables, r)


def pearson_r(x, y) -> float:
    """Scalar Pearson correlation; NaN if either input is constant."""
    r = _pearson(np.column_stack([np.asarray(x, float), np.asarray(y, float)]))
    return float(r[0, 1])


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-variable affine parameters captured at fit time.

    For ``min_max`` ``params[v] = (min, max)``; for ``z_score`` ``params[v] = (mean, std)``.
    """

    method: Literal["min_max", "z_score"]
    params: Mapping[str, tuple[float, float]]

    def __post_init__(self) -> None:
        if self.method not in ("min_max", "z_score"):
            raise ValueError(f"unknown normalization method {self.method!r}")
        for v, (a, b) in self.params.items():
            if self.method == "min_max" and not b > a:
                raise DegenerateRange(f"{v}: max ({b}) must exceed min ({a})")
            if self.method == "z_score" and not b > 0:
                raise DegenerateRange(f"{v}: standard deviation is zero")

    def offset_scale(self, var: str) -> tuple[float, float]:
        a, b = self.params[var]
        return (a, b - a) if self.method == "min_max" else (a, b)

    def apply(self, var: str, x):
        off, scale = self.offset_scale(var)
        return (np.asarray(x, dtype=float) - off) / scale

    def invert(self, var: str, z):
        off, scale = self.offset_scale(var)
        return np.asarray(z, dtype=float) * scale + off


def fit_normalization(
    tables: TimeSeriesTable | Sequence[TimeSeriesTable],
    variables: Sequence[str],
    method: Literal["min_max", "z_score"] = "min_max",
) -> NormalizationSpec:
    """Fit parameters on one table, or jointly on the union of several."""
    if isinstance(tables, TimeSeriesTable):
        tables = [tables]
    params = {}
    for v in variables:
        x = np.concatenate([t.column(v) for t in tables])
        if x.size == 0:
            raise EmptyInput("cannot fit normalization on zero rows")
        if method == "min_max":
            params[v] = (float(x.min()), float(x.max()))
        else:
            params[v] = (float(x.mean()), float(x.std()))
    return NormalizationSpec(method, params)


def normalize(table: TimeSeriesTable, spec: NormalizationSpec) -> TimeSeriesTable:
    """Apply a fitted spec; values outside the fitting range are not clipped."""
    values = dict(table.values)
    for v in spec.params:
        values[v] = spec.apply(v, table.column(v))
    return TimeSeriesTable(table.case_id, table.timestamps, values, table.schema)


def denormalize(table: TimeSeriesTable, spec: NormalizationSpec) -> TimeSeriesTable:
    values = dict(table.values)
    for v in spec.params:
        values[v] = spec.invert(v, table.column(v))
    return TimeSeriesTable(table.case_id, table.timestamps, values, table.schema)


@dataclass(frozen=True)
class ShapeStats:
    skewness: float
    kurtosis: float


def shape_stats(values: Sequence[float] | np.ndarray) -> ShapeStats:
    """Moment-ratio skewness and kurtosis.

    skewness = sum((x - mean)**3) / ((N - 1) * sigma**3)
    kurtosis = N * sum((x - mean)**4) / sum((x - mean)**2)**2

    with ``sigma`` the population standard deviation.
    """
    a = np.asarray(values, dtype=float)
    n = a.size
    if n < 3:
        raise DegenerateInput(f"shape statistics need at least 3 values, got {n}")
    d = a - a.mean()
    m2 = float(np.sum(d**2))
    sigma = math.sqrt(m2 / n)
    if np.ptp(a) == 0 or sigma == 0:
        raise DegenerateInput("shape statistics are undefined for a constant sequence")
    skew = float(np.sum(d**3)) / ((n - 1) * sigma**3)
    kurt = n * float(np.sum(d**4)) / m2**2
    return ShapeStats(skewness=skew, kurtosis=kurt)
