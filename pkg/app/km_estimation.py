"""
Kaplan-Meier estimation from censored sales, the greedy sup-norm plug-in fit
and the confidence width of the KM band
"""

import logging
import math

import numpy as np

from models import DomainError, InsufficientDataError, KMEstimate, PluginFit

logger = logging.getLogger(__name__)

THETA_INTERVAL = (1e-4, 1e4)
SCAN_POINTS = 1024
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def km_fit(observations):
    """
    Product-limit survival 1 - F(x) = prod_{s: Y_(s) <= x} ((t - s) / (t - s + 1))**delta_(s)
    over the sales sorted ascending, uncensored before censored at ties.

    A run of consecutive uncensored order statistics a..b telescopes to
    (t - b) / (t - a + 1); the product is formed run by run so that fully
    uncensored data reproduces the empirical survival (t - j) / t exactly.
    """
    if not observations:
        raise DomainError("km_fit needs at least one observation")
    sales = np.array([o.sale for o in observations], dtype=float)
    unc = np.array([o.uncensored for o in observations], dtype=bool)
    order = np.lexsort((~unc, sales))
    sales, unc = sales[order], unc[order]
    n = len(sales)
    s = np.arange(1, n + 1)

    values = np.full(n, np.nan)
    unc_idx = np.flatnonzero(unc)
    if unc_idx.size:
        breaks = np.flatnonzero(np.diff(unc_idx) != 1) + 1
        starts = np.concatenate(([0], breaks))
        ends = np.concatenate((breaks - 1, [unc_idx.size - 1]))
        a = s[unc_idx[starts]]
        b = s[unc_idx[ends]]
        run_ratio = (n - b) / (n - a + 1)
        before = np.concatenate(([1.0], np.cumprod(run_ratio)[:-1]))
        run_of = np.repeat(np.arange(len(starts)), ends - starts + 1)
        j = s[unc_idx]
        within = (n - j) / (n - a[run_of] + 1)
        values[unc_idx] = before[run_of] * within

    # censored positions carry the last uncensored value forward
    known = ~np.isnan(values)
    last = np.maximum.accumulate(np.where(known, np.arange(n), -1))
    surv = np.where(last >= 0, values[np.maximum(last, 0)], 1.0)

    breakpoints, last_of_tie = np.unique(sales[::-1], return_index=True)
    last_of_tie = n - 1 - last_of_tie
    return KMEstimate(breakpoints=tuple(float(x) for x in breakpoints),
                      survival=tuple(float(v) for v in surv[last_of_tie]),
                      sample_count=n)


def km_eval(estimate, x):
    """Survival at x of the right-continuous step function; 1 before the first breakpoint"""
    bp = np.asarray(estimate.breakpoints)
    sv = np.asarray(estimate.survival)
    xs = np.asarray(x, dtype=float)
    idx = np.searchsorted(bp, xs, side="right") - 1
    out = np.where(idx >= 0, sv[np.maximum(idx, 0)], 1.0)
    return float(out) if out.ndim == 0 else out


def km_cdf(estimate):
    """CDF-like callable 1 - S(x) for sup-distance computations"""
    return lambda x: 1.0 - km_eval(estimate, x)


def weibull_cdf_curve(theta, k):
    """Vectorized Weibull CDF callable"""
    return lambda x: -np.expm1(-theta * np.asarray(x, dtype=float) ** k)


def _evaluate(f, xs):
    try:
        values = np.asarray(f(xs), dtype=float)
        if values.shape == xs.shape:
            return values
    except TypeError:
        pass
    return np.array([f(float(x)) for x in xs])


def sup_distance(f, g, grid):
    """
    max |f - g| over the grid and over the left limit of every grid point,
    so the jump of a step function at a breakpoint is seen from both sides
    """
    xs = np.asarray(grid, dtype=float)
    if xs.size == 0:
        raise DomainError("sup_distance needs a nonempty grid")
    left = np.maximum(np.nextafter(xs, -np.inf), 0.0)
    points = np.concatenate((xs, left))
    return float(np.max(np.abs(_evaluate(f, points) - _evaluate(g, points))))


def km_grid(estimate):
    """0 plus every breakpoint: the exact sup support for continuous-vs-KM distances"""
    return np.concatenate(([0.0], np.asarray(estimate.breakpoints)))


def distance_profile(estimate, k, thetas):
    """
    sup over [0, largest sale] of |F_theta - F_km| for each theta, using both
    sides of every jump of the KM CDF
    """
    bp = np.asarray(estimate.breakpoints) ** k
    right = 1.0 - np.asarray(estimate.survival)
    left = np.concatenate(([0.0], right[:-1]))
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    F = -np.expm1(-np.outer(th, bp))
    dist = np.maximum(np.abs(F - right), np.abs(F - left)).max(axis=1)
    return dist


def plugin_fit(km, k, theta_interval=THETA_INTERVAL, scan_points=SCAN_POINTS):
    """
    Greedy plug-in estimate: the theta whose Weibull CDF is closest to the KM
    CDF in sup norm. A log-spaced scan picks the best bracket and
    golden-section search refines it; the distance is quasi-convex in theta,
    so the refined value is never worse than any scanned theta.
    """
    if all(v == 1.0 for v in km.survival):
        raise InsufficientDataError("insufficient uncensored data")
    lo, hi = theta_interval
    if not 0 < lo < hi:
        raise DomainError(f"theta search interval must be positive and increasing, got {theta_interval}")

    thetas = np.geomspace(lo, hi, scan_points)
    profile = distance_profile(km, k, thetas)
    i = int(np.argmin(profile))
    best_theta, best_dist = float(thetas[i]), float(profile[i])

    a = math.log(thetas[max(i - 1, 0)])
    b = math.log(thetas[min(i + 1, scan_points - 1)])
    objective = lambda u: float(distance_profile(km, k, math.exp(u))[0])
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(200):
        if b - a <= 1e-13:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = objective(d)
    for u, fu in ((c, fc), (d, fd)):
        if fu < best_dist:
            best_theta, best_dist = math.exp(u), fu

    logger.debug("plugin_fit: theta_hat=%.6g distance=%.6g (scan index %d)", best_theta, best_dist, i)
    return PluginFit(theta_hat=best_theta, sup_distance=best_dist, k=k)


def km_confidence_width(t, delta, g_at_x):
    """sqrt(ln(1/delta) / (2t)) / (1 - G(x))"""
    if not 0 <= g_at_x < 1:
        raise DomainError(f"band undefined for G(x) = {g_at_x}; need 0 <= G(x) < 1")
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if t < 1:
        raise DomainError(f"t must be positive, got {t}")
    return math.sqrt(math.log(1.0 / delta) / (2.0 * t)) / (1.0 - g_at_x)


def censoring_cdf_estimate(observations):
    """Empirical CDF of the order quantities, standing in for an unknown G"""
    orders = np.sort(np.array([o.order for o in observations], dtype=float))
    n = len(orders)
    return lambda x: np.searchsorted(orders, np.asarray(x, dtype=float), side="right") / n


def km_band_statistic(estimate, true_cdf, censoring_cdf=None, grid=None, observations=None):
    """
    sup_x |(1 - G(x)) (F_km(x) - F(x))| over the KM grid and its left limits.
    Without a known G, the empirical CDF of the observations' orders is used.
    """
    if censoring_cdf is None:
        if not observations:
            raise DomainError("need a censoring CDF or the observations to estimate it")
        censoring_cdf = censoring_cdf_estimate(observations)
    xs = km_grid(estimate) if grid is None else np.asarray(grid, dtype=float)
    left = np.maximum(np.nextafter(xs, -np.inf), 0.0)
    points = np.concatenate((xs, left))
    weight = 1.0 - _evaluate(censoring_cdf, points)
    gap = _evaluate(km_cdf(estimate), points) - _evaluate(true_cdf, points)
    return float(np.max(np.abs(weight * gap)))
