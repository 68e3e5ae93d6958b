"""Generalized Pareto distribution for threshold excesses.

Parameterisation: shape ``xi``, scale ``sigma`` > 0, support ``y >= 0`` (and
``y <= -sigma/xi`` when ``xi < 0``)::

    G(y) = 1 - (1 + xi*y/sigma) ** (-1/xi)        xi != 0
    G(y) = 1 - exp(-y/sigma)                      xi == 0

Maximum likelihood runs on ``(xi, log sigma)`` with a damped Newton iteration
(analytic gradient and Hessian, feasibility-preserving backtracking, ``xi``
boxed to [-1, 1]) started from probability-weighted-moment estimates. Nelder-Mead
is the fallback when Newton stalls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..errors import FitDidNotConverge

SHAPE_BOUNDS = (-1.0, 1.0)

# below these |xi| the closed forms lose precision and series expansions take over
_SERIES_XI = 1e-6
_SERIES_XI_HESS = 1e-3
# largest Newton move per iteration in (shape, log scale)
_MAX_STEP = 1.0


def _check_scale(sigma: float) -> None:
    if not sigma > 0:
        raise ValueError(f"scale must be positive, got {sigma}")


def cdf(y, xi: float, sigma: float) -> np.ndarray:
    _check_scale(sigma)
    y = np.maximum(np.asarray(y, dtype=float), 0.0)
    z = y / sigma
    if abs(xi) < _SERIES_XI:
        return -np.expm1(-z * (1.0 - xi * z / 2))
    t = np.maximum(1.0 + xi * z, 0.0)
    with np.errstate(divide="ignore"):
        return -np.expm1(-np.log(t) / xi)


def sf(y, xi: float, sigma: float) -> np.ndarray:
    return 1.0 - cdf(y, xi, sigma)


def logpdf(y, xi: float, sigma: float) -> np.ndarray:
    _check_scale(sigma)
    y = np.asarray(y, dtype=float)
    z = y / sigma
    out = np.full(z.shape, -np.inf)
    if abs(xi) < _SERIES_XI:
        # (1 + 1/xi) log1p(xi z) to first order in xi
        ok = (z >= 0) & (1.0 + xi * z > 0)
        zk = z[ok]
        out[ok] = -math.log(sigma) - zk - xi * zk * (1.0 - zk / 2)
        return out
    t = 1.0 + xi * z
    ok = (z >= 0) & (t > 0)
    out[ok] = -math.log(sigma) - (1.0 + 1.0 / xi) * np.log(t[ok])
    return out


def pdf(y, xi: float, sigma: float) -> np.ndarray:
    return np.exp(logpdf(y, xi, sigma))


def ppf(p, xi: float, sigma: float) -> np.ndarray:
    """Quantile function ``sigma * ((1-p)**(-xi) - 1) / xi``."""
    _check_scale(sigma)
    a = -np.log1p(-np.asarray(p, dtype=float))
    if abs(xi) < _SERIES_XI:
        return sigma * a * (1.0 + xi * a / 2)
    return sigma * np.expm1(xi * a) / xi


def rvs(xi: float, sigma: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling."""
    return ppf(rng.random(size), xi, sigma)


def upper_endpoint(xi: float, sigma: float) -> float:
    return -sigma / xi if xi < 0 else math.inf


def log_likelihood(y, xi: float, sigma: float) -> float:
    """Total log-likelihood of excesses ``y``; ``-inf`` outside the support."""
    y = np.asarray(y, dtype=float)
    f = _objective(y, xi, math.log(sigma), 0)[0]
    return -f


def pwm_estimates(y) -> tuple[float, float]:
    """Probability-weighted-moment estimates ``(xi, sigma)``.

    Uses ``a0 = mean(y)`` and ``a1 = mean((n - j)/(n - 1) * y_(j))`` over the
    ascending order statistics, then ``xi = 2 - a0/(a0 - 2 a1)`` and
    ``sigma = 2 a0 a1 / (a0 - 2 a1)``.
    """
    ys = np.sort(np.asarray(y, dtype=float))
    n = ys.size
    if n < 2:
        raise ValueError("PWM estimates need at least 2 values")
    a0 = float(ys.mean())
    j = np.arange(1, n + 1)
    a1 = float(np.mean((n - j) / (n - 1) * ys))
    d = a0 - 2.0 * a1
    if not d > 0:
        return 0.0, a0 if a0 > 0 else 1.0
    return 2.0 - a0 / d, 2.0 * a0 * a1 / d


def _objective(y: np.ndarray, xi: float, ell: float, order: int):
    """Negative log-likelihood in ``(xi, ell = log sigma)`` and, on request,
    its gradient (order >= 1) and Hessian (order 2)."""
    n = y.size
    if not -700.0 < ell < 700.0:  # exp(-ell) would overflow or lose every digit
        return math.inf, None, None
    z = y * math.exp(-ell)
    t = xi * z
    if np.any(t <= -1.0):
        return math.inf, None, None

    g = h = None
    if abs(xi) < _SERIES_XI:
        s1, s2, s3 = float(z.sum()), float(np.dot(z, z)), float(np.sum(z**3))
        f = n * ell + s1 + xi * (s1 - s2 / 2) + xi * xi * (s3 / 3 - s2 / 2)
        if order >= 1:
            g = np.array([
                (s1 - s2 / 2) + 2 * xi * (s3 / 3 - s2 / 2),
                n - s1 + xi * (s2 - s1) + xi * xi * (s2 - s3),
            ])
    else:
        log1p_t = np.log1p(t)
        L = float(log1p_t.sum())
        f = n * ell + (1.0 + 1.0 / xi) * L
        if order >= 1:
            w = 1.0 / (1.0 + t)
            A = float(np.dot(z, w))
            g = np.array([-L / xi**2 + (1.0 + 1.0 / xi) * A, n - (1.0 + xi) * A])
    if order >= 2:
        if abs(xi) < _SERIES_XI_HESS:
            s1, s2, s3 = float(z.sum()), float(np.dot(z, z)), float(np.sum(z**3))
            hxx = 2 * (s3 / 3 - s2 / 2)
            hxl = (s2 - s1) + 2 * xi * (s2 - s3)
            hll = s1 + xi * (s1 - 2 * s2) + xi * xi * (3 * s3 - 2 * s2)
        else:
            w = 1.0 / (1.0 + t)
            zw = z * w
            A = float(zw.sum())
            B = float(np.dot(zw, zw))
            C = float(np.dot(zw, w))
            L = float(np.log1p(t).sum())
            hxx = 2 * L / xi**3 - 2 * A / xi**2 - (1.0 + 1.0 / xi) * B
            hxl = (1.0 + xi) * B - A
            hll = (1.0 + xi) * C
        h = np.array([[hxx, hxl], [hxl, hll]])
    return f, g, h


@dataclass(frozen=True)
class MLEResult:
    shape: float
    scale: float
    log_likelihood: float
    iterations: int
    start: tuple[float, float]  # PWM estimates, clipped into the shape box and made feasible
    start_log_likelihood: float
    method: str


def _feasible_start(y: np.ndarray) -> tuple[float, float]:
    lo, hi = SHAPE_BOUNDS
    xi, sigma = pwm_estimates(y)
    if not math.isfinite(xi) or not math.isfinite(sigma) or sigma <= 0:
        xi, sigma = 0.0, float(y.mean())
    xi = min(max(xi, lo + 0.01), hi - 0.01)
    ymax = float(y.max())
    if xi < 0 and 1.0 + xi * ymax / sigma <= 0:
        sigma = -xi * ymax * 1.05
    return xi, sigma


def _newton_direction(g: np.ndarray, h: np.ndarray, fixed_shape: bool) -> np.ndarray:
    if fixed_shape:
        hll = h[1, 1]
        return np.array([0.0, -g[1] / hll if hll > 0 else -g[1]])
    evals, evecs = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(evals).max()))
    floor = 1e-8 * scale
    evals = np.where(evals > floor, evals, np.abs(evals) + floor)
    return -(evecs @ ((evecs.T @ g) / evals))


def _projected_gradient(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    lo, hi = SHAPE_BOUNDS
    pg = g.copy()
    if (x[0] <= lo and g[0] > 0) or (x[0] >= hi and g[0] < 0):
        pg[0] = 0.0
    return pg


def _newton(y: np.ndarray, x0: np.ndarray, maxiter: int, gtol: float):
    lo, hi = SHAPE_BOUNDS
    n = y.size
    x = x0.copy()
    f, g, h = _objective(y, x[0], x[1], 2)
    for it in range(1, maxiter + 1):
        pg = _projected_gradient(x, g)
        if np.max(np.abs(pg)) / n < gtol:
            return x, f, it - 1, True
        d = _newton_direction(g, h, fixed_shape=pg[0] == 0.0 and g[0] != 0.0)
        big = float(np.max(np.abs(d)))
        if big > _MAX_STEP:  # ill-conditioned Hessian near the shape bounds
            d *= _MAX_STEP / big
        step = 1.0
        accepted = False
        for _ in range(60):
            xn = x + step * d
            xn[0] = min(max(xn[0], lo), hi)
            fn = _objective(y, xn[0], xn[1], 0)[0]
            if math.isfinite(fn) and fn <= f + 1e-4 * float(np.dot(g, xn - x)):
                accepted = True
                break
            step *= 0.5
        if not accepted or np.max(np.abs(xn - x)) <= 1e-14 * (1.0 + np.max(np.abs(x))):
            # no further decrease representable; accept if already near-stationary
            return x, f, it, bool(np.max(np.abs(pg)) / n < 1e-5)
        x = xn
        f, g, h = _objective(y, x[0], x[1], 2)
    pg = _projected_gradient(x, g)
    return x, f, maxiter, bool(np.max(np.abs(pg)) / n < gtol)


def fit_mle(y, *, maxiter: int = 200, gtol: float = 1e-10) -> MLEResult:
    """Maximum-likelihood ``(xi, sigma)`` for positive excesses ``y``."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("need a 1-d array of at least 2 excesses")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("excesses must be positive and finite")

    xi0, sigma0 = _feasible_start(y)
    x0 = np.array([xi0, math.log(sigma0)])
    f0 = _objective(y, x0[0], x0[1], 0)[0]

    x, f, iters, ok = _newton(y, x0, maxiter, gtol)
    method = "newton"
    if not ok:
        res = minimize(
            lambda p: _objective(y, p[0], p[1], 0)[0],
            x if f <= f0 else x0,
            method="Nelder-Mead",
            bounds=[SHAPE_BOUNDS, (None, None)],
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
        )
        iters += int(res.nit)
        if res.success and res.fun <= f:
            x, f = np.asarray(res.x, dtype=float), float(res.fun)
            ok = True
            method = "nelder-mead"
        elif res.success:
            ok = True
    if not ok or not math.isfinite(f):
        raise FitDidNotConverge(iters, (float(x[0]), float(math.exp(x[1]))))
    return MLEResult(
        shape=float(x[0]),
        scale=float(math.exp(x[1])),
        log_likelihood=-float(f),
        iterations=iters,
        start=(float(xi0), float(sigma0)),
        start_log_likelihood=-float(f0),
        method=method,
    )


def pwm_log_likelihood(y) -> float:
    """Log-likelihood at the raw PWM estimates (``-inf`` if they violate the support)."""
    y = np.asarray(y, dtype=float)
    xi, sigma = pwm_estimates(y)
    if not (math.isfinite(xi) and math.isfinite(sigma) and sigma > 0):
        return -math.inf
    return log_likelihood(y, xi, sigma)
