"""
Domain models for the censored newsvendor lab
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np


class LabError(Exception):
    """Base class for every error raised by the lab"""


class DomainError(LabError, ValueError):
    """Numeric input outside the domain of an operation"""


class ConfigError(LabError):
    """Invalid experiment configuration; names the offending key"""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class InsufficientDataError(LabError):
    """Not enough uncensored sales to fit a parametric model"""


class UnknownPolicyError(LabError, KeyError):
    """Policy name not in the registry"""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown policy"


class TrialError(LabError):
    """A single trial failed; carries the trial index and the policy name"""

    def __init__(self, trial_index, policy_name, cause):
        self.trial_index = trial_index
        self.policy_name = policy_name
        super().__init__(f"trial {trial_index} ({policy_name}) failed: {cause}")


def _require(condition, message):
    if not condition:
        raise DomainError(message)


@dataclass(frozen=True)
class WeibullParams:
    """Weibull demand F(x) = 1 - exp(-theta * x**k) with known shape k"""
    theta: float
    k: float = 1.0

    def __post_init__(self):
        _require(self.theta > 0, f"theta must be positive, got {self.theta}")
        _require(self.k > 0, f"k must be positive, got {self.k}")


@dataclass(frozen=True)
class GammaParams:
    """Shape-rate Gamma, used for the prior and posterior on theta"""
    alpha: float
    beta: float

    def __post_init__(self):
        _require(self.alpha > 0, f"alpha must be positive, got {self.alpha}")
        _require(self.beta > 0, f"beta must be positive, got {self.beta}")

    @property
    def mean(self):
        return self.alpha / self.beta


@dataclass(frozen=True)
class NormalParams:
    mu: float
    sigma: float

    def __post_init__(self):
        _require(self.sigma > 0, f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class DemandRange:
    d_low: float
    d_high: float

    def __post_init__(self):
        _require(0 <= self.d_low < self.d_high,
                 f"need 0 <= d_low < d_high, got ({self.d_low}, {self.d_high})")


@dataclass(frozen=True)
class CostParams:
    """Unit overage cost h and unit stock-out penalty p"""
    h: float
    p: float

    def __post_init__(self):
        _require(self.h > 0, f"h must be positive, got {self.h}")
        _require(self.p > 0, f"p must be positive, got {self.p}")

    @property
    def service_level(self):
        return self.p / (self.p + self.h)


@dataclass(frozen=True)
class CensoredObservation:
    """
    What the seller sees after one period: the order, the sale min(D, y) and
    whether the sale was below the order. Lost demand is never stored.
    """
    order: float
    sale: float
    uncensored: bool

    def __post_init__(self):
        _require(self.order >= 0 and self.sale >= 0, "order and sale must be nonnegative")
        _require(self.sale <= self.order, f"sale {self.sale} exceeds order {self.order}")
        if self.uncensored:
            _require(self.sale < self.order, "uncensored sale must be below the order")
        else:
            _require(self.sale == self.order, "censored sale must equal the order")

    @classmethod
    def from_demand(cls, order, demand):
        """Censor a demand draw at the order quantity"""
        if demand < order:
            return cls(order=order, sale=demand, uncensored=True)
        return cls(order=order, sale=order, uncensored=False)


@dataclass(frozen=True)
class KMEstimate:
    """Right-continuous Kaplan-Meier survival step function"""
    breakpoints: Tuple[float, ...]
    survival: Tuple[float, ...]
    sample_count: int


@dataclass(frozen=True)
class PluginFit:
    theta_hat: float
    sup_distance: float
    k: float


@dataclass(frozen=True)
class BoundReport:
    L: float
    T0: float
    C0: float
    theorem1_bound: float
    epsilons: Tuple[float, ...] = ()


DemandSpec = Union[WeibullParams, NormalParams]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one regret experiment"""
    horizon: int
    trials: int
    seed: int
    cost: CostParams
    demand: DemandSpec
    prior: GammaParams
    policies: Tuple[str, ...]
    regret_mode: str = "frequentist"
    checkpoints: Tuple[int, ...] = ()
    name: str = "experiment"
    k: float = 1.0
    delta: float = 0.1
    ucb_width_scale: float = 1.0
    theta_min: float = 1e-6
    oco_eta0: Optional[float] = None
    oco_y_max: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError("horizon", f"must be >= 1, got {self.horizon}")
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if self.regret_mode not in ("frequentist", "bayesian"):
            raise ConfigError("regret_mode", f"must be frequentist or bayesian, got {self.regret_mode!r}")
        if not self.policies:
            raise ConfigError("policies", "at least one policy is required")
        for t in self.checkpoints:
            if not 1 <= t <= self.horizon:
                raise ConfigError("checkpoints", f"period {t} outside [1, {self.horizon}]")
        if list(self.checkpoints) != sorted(set(self.checkpoints)):
            raise ConfigError("checkpoints", "must be strictly increasing")
        if not 0 < self.delta < 1:
            raise ConfigError("delta", f"must lie in (0, 1), got {self.delta}")
        if self.k <= 0:
            raise ConfigError("demand.k", f"must be positive, got {self.k}")
        if self.regret_mode == "bayesian" and not isinstance(self.demand, WeibullParams):
            raise ConfigError("regret_mode", "bayesian regret needs Weibull demand")
        if self.workers < 1:
            raise ConfigError("workers", f"must be >= 1, got {self.workers}")

    @property
    def service_level(self):
        return self.cost.service_level

    @property
    def family(self):
        return "weibull" if isinstance(self.demand, WeibullParams) else "normal"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Per-period records of one policy run; arrays all have length T"""
    policy: str
    trial_index: int
    theta_star: Optional[float]
    optimal_order: float
    orders: np.ndarray
    sales: np.ndarray
    uncensored: np.ndarray
    demands: np.ndarray
    realized_costs: np.ndarray
    pseudo_regret: np.ndarray
    realized_regret: np.ndarray
    # posterior (alpha, beta) in force when each order was chosen, if the policy keeps one
    posterior_alpha: Optional[np.ndarray] = None
    posterior_beta: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.orders)

    def observations(self):
        return [CensoredObservation(float(y), float(s), bool(u))
                for y, s, u in zip(self.orders, self.sales, self.uncensored)]


@dataclass(frozen=True, eq=False)
class RegretCurve:
    """Cumulative regret across trials at each checkpoint"""
    policy: str
    periods: Tuple[int, ...]
    mean: np.ndarray
    stderr: np.ndarray
    trials: int
    realized_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    realized_stderr: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def at(self, period):
        """Mean cumulative regret at a checkpoint"""
        try:
            idx = self.periods.index(period)
        except ValueError:
            raise DomainError(f"period {period} is not a checkpoint of the {self.policy} curve")
        return float(self.mean[idx])
