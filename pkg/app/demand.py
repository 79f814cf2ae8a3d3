"""
Demand models: the Weibull family with known shape, Gamma sampling for the
posterior, and truncated Normal demand for the misspecified experiments
"""

import math

import numpy as np
from scipy import special

from models import DemandRange, DomainError, NormalParams, WeibullParams


def weibull_cdf(params, x):
    """F(x) = 1 - exp(-theta * x**k)"""
    if x < 0:
        raise DomainError(f"weibull_cdf needs x >= 0, got {x}")
    return -math.expm1(-params.theta * x ** params.k)


def weibull_survival(params, x):
    if x < 0:
        raise DomainError(f"weibull_survival needs x >= 0, got {x}")
    return math.exp(-params.theta * x ** params.k)


def weibull_inverse_cdf(params, q):
    """Quantile ((-ln(1 - q)) / theta) ** (1/k)"""
    if not 0 <= q < 1:
        raise DomainError(f"quantile level must lie in [0, 1), got {q}")
    return (-math.log1p(-q) / params.theta) ** (1.0 / params.k)


def weibull_mean(params):
    """E[D] = theta**(-1/k) * Gamma(1 + 1/k)"""
    k = params.k
    return math.exp(special.gammaln(1.0 + 1.0 / k) - math.log(params.theta) / k)


def weibull_expected_sales(params, y):
    """E[min(y, D)] = E[D] * P(1/k, theta * y**k), the regularized lower incomplete gamma"""
    if y <= 0:
        return 0.0
    return weibull_mean(params) * float(special.gammainc(1.0 / params.k, params.theta * y ** params.k))


def _normal_pdf(u):
    return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def _sales_primitive(u):
    """Antiderivative of 1 - Phi(u)"""
    return u * float(special.ndtr(-u)) - _normal_pdf(u)


def weibull_sample(params, rng):
    """Inverse-transform draw from one uniform of the stream"""
    return weibull_inverse_cdf(params, float(rng.random()))


def gamma_sample(params, rng):
    """Shape-rate Gamma draw; numpy takes a scale, hence 1/beta"""
    return float(rng.gamma(params.alpha, 1.0 / params.beta))


def normal_sample_truncated(params, rng):
    """Normal(mu, sigma**2) draw, redrawn until nonnegative"""
    while True:
        x = float(rng.normal(params.mu, params.sigma))
        if x >= 0:
            return x


def truncated_normal_quantile(params, u):
    """Inverse CDF of Normal(mu, sigma**2) conditioned on being >= 0"""
    if not 0 <= u < 1:
        raise DomainError(f"quantile level must lie in [0, 1), got {u}")
    lower = special.ndtr(-params.mu / params.sigma)
    return max(0.0, params.mu + params.sigma * float(special.ndtri(lower + u * (1.0 - lower))))


def demand_range(theta_star, k, horizon, delta):
    """
    Interval [d_low, d_high] holding each demand draw with probability at
    least 1 - delta / T:
        d_low  = (ln(2T / (2T - delta)) / theta)**(1/k)
        d_high = (ln(2T / delta) / theta)**(1/k)
    """
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    two_t = 2.0 * horizon
    d_low = (-math.log1p(-delta / two_t) / theta_star) ** (1.0 / k)
    d_high = (math.log(two_t / delta) / theta_star) ** (1.0 / k)
    return DemandRange(d_low=d_low, d_high=d_high)


class WeibullDemand:
    """Weibull demand as a distribution object the simulator can sample and score"""

    family = "weibull"

    def __init__(self, params):
        self.params = params

    def cdf(self, x):
        return weibull_cdf(self.params, x)

    def survival(self, x):
        return weibull_survival(self.params, x)

    def quantile(self, q):
        return weibull_inverse_cdf(self.params, q)

    def mean(self):
        return weibull_mean(self.params)

    def expected_sales(self, y):
        return weibull_expected_sales(self.params, y)

    def sample(self, rng):
        return weibull_sample(self.params, rng)

    def sample_many(self, rng, size):
        u = rng.random(size)
        return (-np.log1p(-u) / self.params.theta) ** (1.0 / self.params.k)


class TruncatedNormalDemand:
    """
    Normal demand truncated at zero by resampling. With a = -mu / sigma and
    Z = P(N >= a), every function below is a scalar expression in ndtr.
    """

    family = "normal"

    def __init__(self, params):
        self.params = params
        self._a = -params.mu / params.sigma
        self._mass = float(special.ndtr(-self._a))
        self._lower_tail = float(special.ndtr(self._a))
        self._mean = params.mu + params.sigma * _normal_pdf(self._a) / self._mass

    def _z(self, x):
        return (x - self.params.mu) / self.params.sigma

    def cdf(self, x):
        if x < 0:
            raise DomainError(f"cdf needs x >= 0, got {x}")
        return (float(special.ndtr(self._z(x))) - self._lower_tail) / self._mass

    def survival(self, x):
        if x <= 0:
            return 1.0
        return float(special.ndtr(-self._z(x))) / self._mass

    def expected_sales(self, y):
        """E[min(y, D)] = sigma / Z * (H(b) - H(a)), H(u) = u (1 - Phi(u)) - phi(u)"""
        if y <= 0:
            return 0.0
        return self.params.sigma / self._mass * (_sales_primitive(self._z(y)) - _sales_primitive(self._a))

    def quantile(self, q):
        return truncated_normal_quantile(self.params, q)

    def mean(self):
        return self._mean

    def sample(self, rng):
        return normal_sample_truncated(self.params, rng)

    def sample_many(self, rng, size):
        return np.array([normal_sample_truncated(self.params, rng) for _ in range(size)])


def as_distribution(dist):
    """Wrap parameter records into distribution objects; pass objects through"""
    if isinstance(dist, WeibullParams):
        return WeibullDemand(dist)
    if isinstance(dist, NormalParams):
        return TruncatedNormalDemand(dist)
    if hasattr(dist, "survival") and hasattr(dist, "mean"):
        return dist
    raise DomainError(f"unsupported demand description: {dist!r}")
