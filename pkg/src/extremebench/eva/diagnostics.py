"""Goodness of fit for a GPD fitted to excesses."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sp_stats

from . import gpd
from .pot import ExceedanceSet, GPDFit


@dataclass(frozen=True)
class FitDiagnostics:
    r_squared: float
    p_value: float
    slope: float
    intercept: float
    qq_points: np.ndarray  # (n, 2): empirical quantile, model quantile
    cdf_points: np.ndarray  # (n, 3): value, empirical CDF, model CDF


def plotting_positions(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / (n + 1.0)


def fit_diagnostics(exceedances: ExceedanceSet, fit: GPDFit) -> FitDiagnostics:
    """Q-Q regression of sorted excesses on fitted GPD quantiles.

    Empirical probabilities are ``i/(n+1)``. ``r_squared`` and ``p_value`` come
    from the least-squares regression of empirical on model quantiles; the
    p-value tests a zero slope.
    """
    y = np.sort(exceedances.excesses)
    p = plotting_positions(y.size)
    model_q = gpd.ppf(p, fit.shape, fit.scale)
    model_cdf = gpd.cdf(y, fit.shape, fit.scale)

    if y.size >= 2 and np.ptp(model_q) > 0 and np.ptp(y) > 0:
        reg = sp_stats.linregress(model_q, y)
        r2 = float(reg.rvalue) ** 2
        pv = float(reg.pvalue)
        slope, intercept = float(reg.slope), float(reg.intercept)
    else:
        r2, pv, slope, intercept = math.nan, math.nan, math.nan, math.nan
    if math.isnan(pv):
        pv = 1.0
    r2 = min(max(r2, 0.0), 1.0) if not math.isnan(r2) else 0.0
    return FitDiagnostics(
        r_squared=r2,
        p_value=min(max(pv, 0.0), 1.0),
        slope=slope,
        intercept=intercept,
        qq_points=np.column_stack([y, model_q]),
        cdf_points=np.column_stack([y, p, model_cdf]),
    )
