"""
Ordering policies behind one sequential interface: Thompson Sampling,
phased UCB, OCO subgradient, myopic Bayesian, KM plug-in, plus control
policies used to calibrate the harness
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace

import numpy as np

from demand import gamma_sample, weibull_inverse_cdf
from km_estimation import km_fit, plugin_fit
from models import (
    CostParams,
    DomainError,
    GammaParams,
    InsufficientDataError,
    UnknownPolicyError,
    WeibullParams,
)
from newsvendor import service_level, weibull_order_for_theta

logger = logging.getLogger(__name__)

POLICY_NAMES = ("ts", "ucb", "oco", "myopic", "km-plugin")


def conjugate_update(posterior, k, obs):
    """(alpha, beta) -> (alpha + delta, beta + Y**k)"""
    return GammaParams(alpha=posterior.alpha + (1.0 if obs.uncensored else 0.0),
                       beta=posterior.beta + obs.sale ** k)


def ts_order(cp, theta, k):
    """Critical-quantile order for a sampled theta; strictly decreasing in theta"""
    return weibull_order_for_theta(cp, theta, k)


@dataclass(frozen=True)
class TSState:
    posterior: GammaParams
    k: float
    cp: CostParams


def ts_draw(state, rng):
    """Sample theta_t ~ Gamma(alpha, beta) and return (theta_t, order)"""
    theta = gamma_sample(state.posterior, rng)
    return theta, ts_order(state.cp, theta, state.k)


def ts_choose(state, rng):
    return ts_draw(state, rng)[1]


@dataclass
class UCBState:
    """Posterior statistics plus the order cached for the current epoch"""
    posterior: GammaParams
    k: float
    cp: CostParams
    horizon: int
    width_scale: float = 1.0
    theta_min: float = 1e-6
    epoch: int = 0
    epoch_start: int = 0
    cached_order: float = math.nan


def is_epoch_start(period):
    """Epochs start at periods 1, 2, 4, 8, ..."""
    return period >= 1 and period & (period - 1) == 0


def ucb_theta_lcb(state, observations):
    """
    Lower confidence bound on theta. The centre (alpha - 1) / beta is
    widened by sqrt(ln T * t) (alpha - 1) / beta**2, the concentration width
    of beta / (alpha - 1) carried to theta-space to first order.
    """
    a, b = state.posterior.alpha, state.posterior.beta
    centre = (a - 1.0) / b
    if centre <= 0:
        return state.theta_min
    width = state.width_scale * math.sqrt(math.log(state.horizon) * observations) * (a - 1.0) / b ** 2
    return max(centre - width, state.theta_min)


def ucb_choose(state, period):
    """Optimistic order, recomputed only at epoch starts (lower theta means a larger order)"""
    if is_epoch_start(period) or math.isnan(state.cached_order):
        theta_lcb = ucb_theta_lcb(state, period - 1)
        state.cached_order = weibull_inverse_cdf(WeibullParams(theta_lcb, state.k), service_level(state.cp))
        state.epoch = int(math.log2(period)) if period >= 1 else 0
        state.epoch_start = period
        logger.debug("ucb epoch %d at period %d: theta_lcb=%.6g order=%.6g",
                     state.epoch, period, theta_lcb, state.cached_order)
    return state.cached_order


@dataclass
class OCOState:
    y: float
    eta0: float
    y_max: float
    cp: CostParams


def oco_step(state, period, obs):
    """
    Projected subgradient step. The subgradient of the expected cost at y is
    h 1[D < y] - p 1[D >= y], which the censoring flag reveals exactly.
    """
    grad = state.cp.h if obs.uncensored else -state.cp.p
    eta = state.eta0 / math.sqrt(period)
    state.y = float(np.clip(state.y - eta * grad, 0.0, state.y_max))
    return state.y


def oco_choose_and_step(state, period, obs=None):
    """Current order, after consuming `obs` when one is given"""
    if obs is not None:
        return oco_step(state, period, obs)
    return state.y


@dataclass(frozen=True)
class MyopicState:
    posterior: GammaParams
    k: float
    cp: CostParams


def myopic_choose(state):
    """
    Critical quantile of the posterior predictive, whose survival is
    (beta / (beta + y**k))**alpha:  y = (beta (((p+h)/h)**(1/alpha) - 1))**(1/k)
    """
    a, b = state.posterior.alpha, state.posterior.beta
    cp = state.cp
    return (b * math.expm1(math.log((cp.p + cp.h) / cp.h) / a)) ** (1.0 / state.k)


class Policy(ABC):
    """Sequential decision interface: choose an order, then observe censored feedback"""

    name = "policy"

    @abstractmethod
    def choose(self, period, rng):
        """Order for `period` (1-based)"""

    def observe(self, obs, period):
        """Consume the censored feedback of `period`"""

    @property
    def posterior(self):
        return None


class ThompsonSamplingPolicy(Policy):
    name = "ts"

    def __init__(self, prior, k, cp):
        self.state = TSState(posterior=prior, k=k, cp=cp)
        self.last_theta = None

    def choose(self, period, rng):
        self.last_theta, order = ts_draw(self.state, rng)
        return order

    def observe(self, obs, period):
        self.state = replace(self.state, posterior=conjugate_update(self.state.posterior, self.state.k, obs))

    @property
    def posterior(self):
        return self.state.posterior


class PhasedUCBPolicy(Policy):
    name = "ucb"

    def __init__(self, prior, k, cp, horizon, width_scale=1.0, theta_min=1e-6):
        self.state = UCBState(posterior=prior, k=k, cp=cp, horizon=horizon,
                              width_scale=width_scale, theta_min=theta_min)

    def choose(self, period, rng):
        return ucb_choose(self.state, period)

    def observe(self, obs, period):
        self.state.posterior = conjugate_update(self.state.posterior, self.state.k, obs)

    @property
    def posterior(self):
        return self.state.posterior


class OCOPolicy(Policy):
    name = "oco"

    def __init__(self, prior, k, cp, eta0=None, y_max=None):
        if y_max is None:
            y_max = weibull_inverse_cdf(WeibullParams(prior.alpha / prior.beta, k), 0.999)
        if eta0 is None:
            eta0 = y_max
        if y_max <= 0 or eta0 <= 0:
            raise DomainError(f"OCO needs y_max > 0 and eta0 > 0, got {y_max}, {eta0}")
        self.state = OCOState(y=y_max / 2.0, eta0=eta0, y_max=y_max, cp=cp)

    def choose(self, period, rng):
        return oco_choose_and_step(self.state, period)

    def observe(self, obs, period):
        oco_choose_and_step(self.state, period, obs)


class MyopicPolicy(Policy):
    name = "myopic"

    def __init__(self, prior, k, cp):
        self.state = MyopicState(posterior=prior, k=k, cp=cp)

    def choose(self, period, rng):
        return myopic_choose(self.state)

    def observe(self, obs, period):
        self.state = replace(self.state, posterior=conjugate_update(self.state.posterior, self.state.k, obs))

    @property
    def posterior(self):
        return self.state.posterior


class KMPluginPolicy(Policy):
    """Orders at the critical quantile of the Weibull closest in sup-norm to the KM estimate"""

    name = "km-plugin"

    def __init__(self, prior, k, cp):
        self.k = k
        self.cp = cp
        self.fallback_theta = prior.alpha / prior.beta
        self.observations = []
        self.theta_hat = self.fallback_theta

    def choose(self, period, rng):
        if any(o.uncensored for o in self.observations):
            try:
                self.theta_hat = plugin_fit(km_fit(self.observations), self.k).theta_hat
            except InsufficientDataError:
                self.theta_hat = self.fallback_theta
        return weibull_order_for_theta(self.cp, self.theta_hat, self.k)

    def observe(self, obs, period):
        self.observations.append(obs)


class FixedOrderPolicy(Policy):
    """Constant order; with y* it is the oracle, with y* + x the linear-regret control"""

    def __init__(self, order, name="fixed"):
        if order < 0:
            raise DomainError(f"order must be nonnegative, got {order}")
        self.order = order
        self.name = name

    def choose(self, period, rng):
        return self.order


def is_control_policy(name):
    return name == "oracle" or name.startswith(("offset:", "fixed:"))


def make_policy(name, config, optimal_order=None):
    """
    Build a fresh policy for one trial. Control policies need the true
    optimal order; learning policies only see the prior.
    """
    cp, prior, k = config.cost, config.prior, config.k
    if name == "ts":
        return ThompsonSamplingPolicy(prior, k, cp)
    if name == "ucb":
        return PhasedUCBPolicy(prior, k, cp, config.horizon,
                               width_scale=config.ucb_width_scale, theta_min=config.theta_min)
    if name == "oco":
        return OCOPolicy(prior, k, cp, eta0=config.oco_eta0, y_max=config.oco_y_max)
    if name == "myopic":
        return MyopicPolicy(prior, k, cp)
    if name == "km-plugin":
        return KMPluginPolicy(prior, k, cp)
    if is_control_policy(name):
        if name.startswith("fixed:"):
            return FixedOrderPolicy(_parse_amount(name), name=name)
        if optimal_order is None:
            raise DomainError(f"control policy {name!r} needs the optimal order")
        offset = _parse_amount(name) if name.startswith("offset:") else 0.0
        return FixedOrderPolicy(max(optimal_order + offset, 0.0), name=name)
    raise UnknownPolicyError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)} "
                             f"or a control policy (oracle, offset:<x>, fixed:<y>)")


def validate_policy_name(name):
    if name in POLICY_NAMES or name == "oracle":
        return name
    if name.startswith(("offset:", "fixed:")):
        _parse_amount(name)
        return name
    raise UnknownPolicyError(f"unknown policy {name!r}")


def _parse_amount(name):
    try:
        return float(name.split(":", 1)[1])
    except ValueError:
        raise UnknownPolicyError(f"bad amount in policy name {name!r}")
