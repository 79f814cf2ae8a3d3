"""
Newsvendor objective: realized and expected cost, the critical-quantile
optimal order and the service level
"""

import math

from scipy import integrate, optimize

from demand import as_distribution, weibull_inverse_cdf
from models import DomainError, NormalParams, WeibullParams

QUAD_ABS_TOL = 1e-9
TAIL_LEVEL = 1.0 - 1e-16


def service_level(cp):
    """gamma = p / (p + h)"""
    return cp.p / (cp.p + cp.h)


def realized_cost(cp, y, d):
    """h (y - d)+ + p (d - y)+"""
    if y < 0 or d < 0:
        raise DomainError(f"order and demand must be nonnegative, got y={y}, d={d}")
    return cp.h * max(y - d, 0.0) + cp.p * max(d - y, 0.0)


def expected_sales(dist, y):
    """
    E[min(y, D)], the integral of the survival function over [0, y]. Uses
    the distribution's closed form when it has one; otherwise quadrature
    stops at the 1 - 1e-16 quantile, past which S(x) is numerically zero.
    """
    if y < 0:
        raise DomainError(f"order must be nonnegative, got {y}")
    if y == 0:
        return 0.0
    closed_form = getattr(dist, "expected_sales", None)
    if closed_form is not None:
        return closed_form(y)
    upper = y
    if hasattr(dist, "quantile"):
        upper = min(y, dist.quantile(TAIL_LEVEL))
    value, _ = integrate.quad(dist.survival, 0.0, upper, epsabs=QUAD_ABS_TOL, epsrel=1e-12, limit=200)
    return value


def expected_cost(cp, dist, y):
    """
    E[h (y - D)+ + p (D - y)+] = h (y - m(y)) + p (E[D] - m(y)),
    m(y) = E[min(y, D)]. `dist` is WeibullParams, NormalParams or a
    distribution object from demand.py.
    """
    dist = as_distribution(dist)
    m = expected_sales(dist, y)
    return cp.h * (y - m) + cp.p * (dist.mean() - m)


def optimal_order(cp, dist):
    """Critical quantile y* = F^{-1}(p / (p + h))"""
    if isinstance(dist, WeibullParams):
        return weibull_inverse_cdf(dist, service_level(cp))
    if isinstance(dist, NormalParams):
        return truncated_normal_optimal_order(cp, dist)
    return as_distribution(dist).quantile(service_level(cp))


def truncated_normal_optimal_order(cp, params, xtol=1e-9):
    """Critical quantile of the zero-truncated Normal by bisection"""
    dist = as_distribution(params)
    gamma = service_level(cp)
    if dist.cdf(0.0) >= gamma:
        return 0.0
    upper = max(params.mu, 0.0) + params.sigma
    while dist.cdf(upper) < gamma:
        upper += params.sigma
    return optimize.bisect(lambda y: dist.cdf(y) - gamma, 0.0, upper, xtol=xtol)


def weibull_order_for_theta(cp, theta, k):
    """Order placed by any policy acting as if theta were the truth"""
    return (-math.log(cp.h / (cp.p + cp.h)) / theta) ** (1.0 / k)


def cost_gap_bounds(cp, y, y_star, d):
    """
    Realized cost gap |g(y, d) - g(y*, d)| together with the decomposition
    bound max(h, p)|y - y*| + (h + p)|min(y, d) - min(y*, d)| and the
    tighter bound (h + p)|y - y*|.
    """
    gap = abs(realized_cost(cp, y, d) - realized_cost(cp, y_star, d))
    sales_gap = abs(min(y, d) - min(y_star, d))
    decomposition = max(cp.h, cp.p) * abs(y - y_star) + (cp.h + cp.p) * sales_gap
    literal = (cp.h + cp.p) * abs(y - y_star)
    return gap, decomposition, literal
