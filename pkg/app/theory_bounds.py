"""
Closed-form evaluators for the constants and bounds of the regret analysis.
They all take theta* explicitly and are diagnostic only; no policy calls them.
"""

import math

from demand import demand_range
from models import BoundReport, DomainError


def _censoring_gap(theta_star, L, k):
    """1 - exp(-theta* L**k): probability that demand falls below an order of size L"""
    return -math.expm1(-theta_star * L ** k)


def lower_bound_L(cp, k, prior, d_low):
    """L = (-1/2 ln(h / (p + h)))**(1/k) * min((beta0 / alpha0)**(1/k), d_low)"""
    if d_low <= 0:
        raise DomainError("d_low must be positive; L would degenerate to 0")
    half_log = (-0.5 * math.log(cp.h / (cp.p + cp.h))) ** (1.0 / k)
    return half_log * min((prior.beta / prior.alpha) ** (1.0 / k), d_low)


def truncation_T0(theta_star, L, k, horizon, delta):
    """T0 = 64 (1 - exp(-theta* L**k))**-2 ln(T / delta)"""
    q = _censoring_gap(theta_star, L, k)
    if q * q == 0.0:
        return math.inf
    return 64.0 * math.log(horizon / delta) / q ** 2


def posterior_confidence_width(t, alpha_t, theta_star, d_high, k, delta):
    """eps_t = sqrt(ln(2 t**2 / delta)) (d_high**k + 2 / theta*) sqrt(t) / (alpha_t - 1)"""
    if alpha_t <= 1:
        raise DomainError(f"alpha_t must exceed 1, got {alpha_t}")
    return (math.sqrt(math.log(2.0 * t * t / delta))
            * (d_high ** k + 2.0 / theta_star)
            * math.sqrt(t) / (alpha_t - 1.0))


def martingale_bound_Mt(t, delta):
    """sqrt(8t) ln(2 t**2 / delta)"""
    return math.sqrt(8.0 * t) * math.log(2.0 * t * t / delta)


def inverse_gamma_tail(alpha):
    """P(1/theta <= beta / (2 alpha)) <= (2/e)**alpha for theta ~ Gamma(alpha, beta)"""
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return math.exp(alpha * (math.log(2.0) - 1.0))


def theoretical_alpha0(horizon, delta):
    """Smallest prior shape satisfying T (2/e)**alpha0 <= delta"""
    return math.log(horizon / delta) / math.log(math.e / 2.0)


def constant_C0(cp, k, theta_star, L, d_high, horizon, delta):
    """
    C0 = max(h, p) (-ln(h/(p+h)))**(1/k) (d_high**k + 2/theta*)
         (1/k) min(L, 1/theta*)**(1/k - 1) sqrt(2 ln(T/delta))
    """
    return (max(cp.h, cp.p)
            * (-math.log(cp.h / (cp.p + cp.h))) ** (1.0 / k)
            * (d_high ** k + 2.0 / theta_star)
            * (1.0 / k) * min(L, 1.0 / theta_star) ** (1.0 / k - 1.0)
            * math.sqrt(2.0 * math.log(horizon / delta)))


def theorem1_bound(cp, k, theta_star, L, d_high, horizon, delta, prior=None):
    """
    Frequentist regret bound of TS:
        C0 (512 q**-3 (ln(T/delta))**(3/2) + 4 q**-1 sqrt(T)),  q = 1 - exp(-theta* L**k)

    The prior enters only through L (see lower_bound_L); it is accepted so
    callers can pass a full problem instance.
    """
    q = _censoring_gap(theta_star, L, k)
    if q ** 3 == 0.0:
        return math.inf
    c0 = constant_C0(cp, k, theta_star, L, d_high, horizon, delta)
    log_term = math.log(horizon / delta)
    return c0 * (512.0 * log_term ** 1.5 / q ** 3 + 4.0 * math.sqrt(horizon) / q)


def theorem2_bound(lipschitz_L, cp, g_max, horizon, delta):
    """16 L (h + p) / (1 - G_max) sqrt(T ln(1/delta))"""
    if g_max >= 1:
        raise DomainError(f"G_max must be below 1, got {g_max}")
    return 16.0 * lipschitz_L * (cp.h + cp.p) / (1.0 - g_max) * math.sqrt(horizon * math.log(1.0 / delta))


def alpha_t_floor(t, T0, prior, theta_star, L, k):
    """
    High-probability lower bound on alpha_t - 1:
        alpha0 - 1                              for t <= T0
        t/2 (1 - exp(-theta* L**k))             beyond T0
    """
    if t <= T0:
        return prior.alpha - 1.0
    return 0.5 * t * _censoring_gap(theta_star, L, k)


def min_ratio(a, b):
    """
    sum(a) / sum(b) together with min over {i: b_i > 0} of a_i / b_i; for
    nonnegative sequences the first is never below the second.
    """
    pairs = [(x, y) for x, y in zip(a, b) if y > 0]
    if not pairs:
        raise DomainError("need at least one positive b_i")
    if any(x < 0 for x in a) or any(y < 0 for y in b):
        raise DomainError("sequences must be nonnegative")
    return sum(a) / sum(b), min(x / y for x, y in pairs)


def bound_report(config):
    """BoundReport for a Weibull configuration, with eps_t for t = 1..T"""
    theta_star, k = config.demand.theta, config.k
    T, delta, prior = config.horizon, config.delta, config.prior
    dr = demand_range(theta_star, k, T, delta)
    L = lower_bound_L(config.cost, k, prior, dr.d_low)
    T0 = truncation_T0(theta_star, L, k, T, delta)
    C0 = constant_C0(config.cost, k, theta_star, L, dr.d_high, T, delta)
    bound = theorem1_bound(config.cost, k, theta_star, L, dr.d_high, T, delta, prior)

    epsilons = []
    for t in range(1, T + 1):
        alpha_t = alpha_t_floor(t, T0, prior, theta_star, L, k) + 1.0
        epsilons.append(posterior_confidence_width(t, alpha_t, theta_star, dr.d_high, k, delta)
                        if alpha_t > 1 else math.inf)
    return BoundReport(L=L, T0=T0, C0=C0, theorem1_bound=bound, epsilons=tuple(epsilons))
