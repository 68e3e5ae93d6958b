"""Nonparametric percentile bootstrap for return-level confidence intervals."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import FitDidNotConverge
from .pot import (
    DEFAULT_MIN_EXCESSES,
    ExceedanceSet,
    GPDFit,
    PoissonRate,
    ReturnLevelEntry,
    excess_return_level,
    fit_gpd_mle,
)
from . import gpd

logger = logging.getLogger(__name__)

# more failed replicates than this fraction marks the interval unstable
UNSTABLE_FRACTION = 0.2


@dataclass(frozen=True)
class ReturnLevelTable:
    fit: GPDFit
    rate: PoissonRate
    entries: list[ReturnLevelEntry]
    ci_level: float
    n_boot: int
    seed: int
    n_failed: int = 0
    unstable: bool = False
    replicate_levels: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def periods(self) -> list[float]:
        return [e.return_period for e in self.entries]


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one replicate, fixed by ``(seed, index)`` alone."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def bootstrap_ci(
    exceedances: ExceedanceSet,
    periods: Sequence[float],
    ci_level: float = 0.95,
    n_boot: int = 1000,
    seed: int = 0,
    *,
    min_excesses: int = DEFAULT_MIN_EXCESSES,
    resample: bool = True,
    fit: GPDFit | None = None,
) -> ReturnLevelTable:
    """Return levels with percentile-bootstrap bounds.

    Each replicate resamples the excesses with replacement, refits the GPD and
    recomputes the excess-scale return level at every period while holding the
    exceedance rate fixed. Bounds are the ``(alpha/2, 1 - alpha/2)`` percentiles
    of the replicates, mapped back to the dependent variable's scale.

    ``resample=False`` refits the full sample in every replicate (no resampling
    variation), which makes the bounds collapse onto the point estimate.
    Replicates whose fit fails are dropped; if more than 20% fail the table is
    flagged ``unstable`` and the bounds come from the survivors.
    """
    if not 0 < ci_level < 1:
        raise ValueError(f"ci_level must lie in (0, 1), got {ci_level}")
    if n_boot < 1 or (resample and n_boot < 100):
        raise ValueError(f"n_boot must be at least 100 when resampling, got {n_boot}")
    periods = [float(t) for t in periods]
    if fit is None:
        fit = fit_gpd_mle(exceedances, min_excesses)
    rate = PoissonRate.from_exceedances(exceedances)
    point_m, floored = excess_return_level(fit.shape, fit.scale, rate.rate, periods)

    y = exceedances.excesses
    n = y.size
    reps = np.full((n_boot, len(periods)), np.nan)
    failed = 0
    for b in range(n_boot):
        sample = y[replicate_rng(seed, b).integers(0, n, n)] if resample else y
        try:
            r = gpd.fit_mle(sample)
        except FitDidNotConverge:
            failed += 1
            continue
        reps[b] = excess_return_level(r.shape, r.scale, rate.rate, periods)[0]

    unstable = failed > UNSTABLE_FRACTION * n_boot
    if unstable:
        logger.warning("%d of %d bootstrap fits failed; interval flagged unstable", failed, n_boot)
    ok = ~np.isnan(reps[:, 0]) if periods else np.zeros(0, bool)
    alpha = 1.0 - ci_level
    if periods and ok.any():
        m_lo, m_hi = np.percentile(reps[ok], [100 * alpha / 2, 100 * (1 - alpha / 2)], axis=0)
    else:
        m_lo = m_hi = np.full(len(periods), math.nan)

    spec = fit.spec
    x_point = spec.to_level(point_m)
    x_lo = spec.to_level(m_lo)
    x_hi = spec.to_level(m_hi)
    entries = [
        ReturnLevelEntry(
            return_period=t,
            return_value=float(x_point[i]),
            ci_lower=float(x_lo[i]),
            ci_upper=float(x_hi[i]),
            ci_level=ci_level,
            floored=bool(floored[i]),
        )
        for i, t in enumerate(periods)
    ]
    return ReturnLevelTable(
        fit=fit,
        rate=rate,
        entries=entries,
        ci_level=ci_level,
        n_boot=n_boot,
        seed=seed,
        n_failed=failed,
        unstable=unstable,
        replicate_levels=reps,
    )
