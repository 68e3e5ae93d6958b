"""Extreme value analysis: threshold excesses, GPD fits, return levels."""

from .bootstrap import ReturnLevelTable, bootstrap_ci, replicate_rng
from .diagnostics import FitDiagnostics, fit_diagnostics
from .pot import (
    DEFAULT_MIN_EXCESSES,
    ExceedanceSet,
    GPDFit,
    PoissonRate,
    ReturnLevelEntry,
    ThresholdSpec,
    block_extrema,
    count_years,
    excess_return_level,
    extract_exceedances,
    fit_gpd_mle,
    resolve_threshold,
    return_levels,
)

__all__ = [
    "DEFAULT_MIN_EXCESSES",
    "ExceedanceSet",
    "FitDiagnostics",
    "GPDFit",
    "PoissonRate",
    "ReturnLevelEntry",
    "ReturnLevelTable",
    "ThresholdSpec",
    "block_extrema",
    "bootstrap_ci",
    "count_years",
    "excess_return_level",
    "extract_exceedances",
    "fit_diagnostics",
    "fit_gpd_mle",
    "replicate_rng",
    "resolve_threshold",
    "return_levels",
]
