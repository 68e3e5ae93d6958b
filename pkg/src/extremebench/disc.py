"""Percentile-thresholded classification of correlation shifts under extremes.

The shift for a pair is ``delta = rho_extreme - rho_full``. A pair is labelled
HPC when its shift is strictly above the upper percentile of all pair shifts,
HNC when strictly below the lower percentile, and NotSignificant otherwise.
Percentiles are taken over the defined off-diagonal upper-triangle entries
(each unordered pair once).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import AllUndefined, VariableMismatch
from .stats import CorrelationMatrix, percentile


class Label(str, enum.Enum):
    HPC = "HPC"
    HNC = "HNC"
    NOT_SIGNIFICANT = "NotSignificant"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class CorrelationDelta:
    variables: tuple[str, ...]
    delta: np.ndarray
    undefined_mask: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        d = np.array(self.delta, dtype=float)
        u = np.array(self.undefined_mask, dtype=bool) | np.isnan(d)
        k = len(self.variables)
        if d.shape != (k, k) or u.shape != (k, k):
            raise VariableMismatch("delta matrix shape does not match variables")
        d[u] = np.nan
        d.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "undefined_mask", u)

    def pair_values(self) -> np.ndarray:
        """Defined upper-triangle shifts in row-major order."""
        iu = np.triu_indices(len(self.variables), k=1)
        vals = self.delta[iu]
        return vals[~self.undefined_mask[iu]]


def correlation_delta(extreme: CorrelationMatrix, full: CorrelationMatrix) -> CorrelationDelta:
    if extreme.variables != full.variables:
        raise VariableMismatch(f"variable lists differ: {extreme.variables} vs {full.variables}")
    undefined = extreme.undefined | full.undefined
    with np.errstate(invalid="ignore"):
        d = extreme.entries - full.entries
    return CorrelationDelta(extreme.variables, d, undefined)


@dataclass(frozen=True)
class PercentileThresholds:
    q_hi: float = 90.0
    q_lo: float = 10.0
    p_hi: float | None = None
    p_lo: float | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.q_lo <= 50 <= self.q_hi <= 100):
            raise ValueError(f"need 0 <= q_lo <= 50 <= q_hi <= 100, got q_lo={self.q_lo}, q_hi={self.q_hi}")
        if self.p_hi is not None and self.p_lo is not None and self.p_lo > self.p_hi:
            raise ValueError("resolved lower threshold exceeds the upper one")


def resolve_thresholds(delta: CorrelationDelta, q_hi: float = 90.0, q_lo: float = 10.0) -> PercentileThresholds:
    vals = delta.pair_values()
    if vals.size == 0:
        raise AllUndefined("no defined off-diagonal correlation shifts")
    p_hi, p_lo = (float(v) for v in percentile(vals, [q_hi, q_lo]))
    return PercentileThresholds(q_hi=q_hi, q_lo=q_lo, p_hi=p_hi, p_lo=p_lo)


@dataclass(frozen=True, eq=False)
class DISCClassification:
    variables: tuple[str, ...]
    labels: np.ndarray  # object array of Label
    thresholds: PercentileThresholds

    def label(self, a: str, b: str) -> Label:
        return self.labels[self.variables.index(a), self.variables.index(b)]

    def pairs(self, label: Label) -> list[tuple[str, str]]:
        k = len(self.variables)
        return [
            (self.variables[i], self.variables[j])
            for i in range(k)
            for j in range(i + 1, k)
            if self.labels[i, j] is label
        ]

    def as_strings(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.labels]


def classify(delta: CorrelationDelta, thresholds: PercentileThresholds) -> DISCClassification:
    if thresholds.p_hi is None or thresholds.p_lo is None:
        raise ValueError("thresholds are not resolved")
    k = len(delta.variables)
    d = delta.delta
    defined = ~delta.undefined_mask
    off = ~np.eye(k, dtype=bool)
    with np.errstate(invalid="ignore"):
        hpc = defined & off & (d > thresholds.p_hi)
        hnc = defined & off & (d < thresholds.p_lo)
    # filled element-wise: np.full would coerce the str-enum members to plain str
    labels = np.empty((k, k), dtype=object)
    for i in range(k):
        for j in range(k):
            labels[i, j] = Label.HPC if hpc[i, j] else Label.HNC if hnc[i, j] else Label.NOT_SIGNIFICANT
    return DISCClassification(delta.variables, labels, thresholds)


def disc_threshold(extreme: CorrelationMatrix, full: CorrelationMatrix, q_hi: float = 90.0, q_lo: float = 10.0):
    """Shift, thresholds and labels in one call."""
    delta = correlation_delta(extreme, full)
    thresholds = resolve_thresholds(delta, q_hi, q_lo)
    return delta, thresholds, classify(delta, thresholds)
