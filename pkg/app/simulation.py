"""
Simulation harness: runs policy-vs-environment episodes with common random
numbers and aggregates cumulative regret across seeded trials
"""

import logging
import math
import zlib
from dataclasses import replace

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from demand import as_distribution, gamma_sample
from models import (
    CensoredObservation,
    DomainError,
    RegretCurve,
    TrialError,
    Trajectory,
    WeibullParams,
)
from newsvendor import expected_cost, optimal_order, realized_cost
from policies import make_policy, validate_policy_name

logger = logging.getLogger(__name__)

DEMAND_STREAM = 0
POLICY_STREAM = 1
DEFAULT_CHECKPOINT_STEP = 10


def trial_rng(seed, trial_index, stream, policy_name=None):
    """
    Counter-based generator keyed by (seed, trial, stream[, policy]). Streams
    never overlap, so trials are reproducible in any order.
    """
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial_index), int(stream)]
    if policy_name is not None:
        key.append(zlib.crc32(policy_name.encode("utf-8")))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def default_checkpoints(horizon, step=DEFAULT_CHECKPOINT_STEP):
    points = list(range(step, horizon + 1, step))
    if not points or points[-1] != horizon:
        points.append(horizon)
    return tuple(points)


def resolve_checkpoints(config):
    return tuple(config.checkpoints) if config.checkpoints else default_checkpoints(config.horizon)


def pseudo_regret_increment(cp, dist, y, y_star=None, g_star=None):
    """Expected-cost gap E[g(y, D)] - E[g(y*, D)] given the true demand law; never negative"""
    if y_star is None:
        y_star = optimal_order(cp, dist)
    if y == y_star:
        return 0.0
    if g_star is None:
        g_star = expected_cost(cp, dist, y_star)
    return max(expected_cost(cp, dist, y) - g_star, 0.0)


def draw_instance(config, trial_index):
    """
    True demand law and the demand sequence of one trial. Both come from the
    trial's demand stream only, so every policy faces the same draws.
    """
    rng = trial_rng(config.seed, trial_index, DEMAND_STREAM)
    if config.regret_mode == "bayesian":
        theta_star = gamma_sample(config.prior, rng)
        params = WeibullParams(theta_star, config.demand.k)
    else:
        params = config.demand
        theta_star = params.theta if isinstance(params, WeibullParams) else None
    demands = as_distribution(params).sample_many(rng, config.horizon)
    return params, theta_star, np.asarray(demands, dtype=float)


def run_trial(config, policy_name, trial_index, score=True):
    """
    One episode: each period the policy orders, demand is drawn, and only
    the censored observation goes back to the policy. With score=False the
    expected-cost bookkeeping is skipped (pseudo-regret left at NaN).
    """
    validate_policy_name(policy_name)
    params, theta_star, demands = draw_instance(config, trial_index)
    cp, T = config.cost, config.horizon
    dist = as_distribution(params)
    y_star = optimal_order(cp, params)
    g_star = expected_cost(cp, dist, y_star) if score else math.nan

    policy = make_policy(policy_name, config, optimal_order=y_star)
    rng = trial_rng(config.seed, trial_index, POLICY_STREAM, policy_name)

    orders = np.empty(T)
    sales = np.empty(T)
    uncensored = np.zeros(T, dtype=bool)
    costs = np.empty(T)
    pseudo = np.full(T, math.nan)
    realized = np.empty(T)
    keeps_posterior = policy.posterior is not None
    post_a = np.empty(T) if keeps_posterior else None
    post_b = np.empty(T) if keeps_posterior else None
    expected_cache = {}

    for t in range(1, T + 1):
        i = t - 1
        if keeps_posterior:
            post_a[i], post_b[i] = policy.posterior.alpha, policy.posterior.beta
        y = float(policy.choose(t, rng))
        if not y >= 0 or math.isinf(y):
            raise DomainError(f"{policy_name} produced an invalid order {y} at period {t}")
        d = float(demands[i])
        obs = CensoredObservation.from_demand(y, d)
        policy.observe(obs, t)

        orders[i], sales[i], uncensored[i] = y, obs.sale, obs.uncensored
        costs[i] = realized_cost(cp, y, d)
        realized[i] = costs[i] - realized_cost(cp, y_star, d)
        if score:
            if y not in expected_cache:
                expected_cache[y] = pseudo_regret_increment(cp, dist, y, y_star=y_star, g_star=g_star)
            pseudo[i] = expected_cache[y]

    return Trajectory(policy=policy_name, trial_index=trial_index, theta_star=theta_star,
                      optimal_order=y_star, orders=orders, sales=sales, uncensored=uncensored,
                      demands=demands, realized_costs=costs, pseudo_regret=pseudo,
                      realized_regret=realized, posterior_alpha=post_a, posterior_beta=post_b)


def _run_trial_guarded(config, policy_name, trial_index, score):
    try:
        return run_trial(config, policy_name, trial_index, score=score)
    except Exception as exc:
        raise TrialError(trial_index, policy_name, exc) from exc


def run_policy_trials(config, policy_name, score=True, progress=False):
    """All trials of one policy, in trial order"""
    validate_policy_name(policy_name)
    indices = range(config.trials)
    if progress:
        indices = tqdm(indices, desc=f"{config.name}:{policy_name}", unit="trial", leave=False)
    if config.workers == 1:
        return [_run_trial_guarded(config, policy_name, i, score) for i in indices]
    return Parallel(n_jobs=config.workers)(
        delayed(_run_trial_guarded)(config, policy_name, i, score) for i in indices)


def aggregate_curve(policy_name, trajectories, checkpoints):
    """Mean and standard error of cumulative regret at each checkpoint, merged by trial index"""
    trajectories = sorted(trajectories, key=lambda tr: tr.trial_index)
    idx = np.asarray(checkpoints) - 1
    cum = np.array([np.cumsum(tr.pseudo_regret)[idx] for tr in trajectories])
    cum_real = np.array([np.cumsum(tr.realized_regret)[idx] for tr in trajectories])
    n = len(trajectories)

    def stderr(values):
        if n < 2:
            return np.zeros(values.shape[1])
        return values.std(axis=0, ddof=1) / math.sqrt(n)

    return RegretCurve(policy=policy_name, periods=tuple(int(c) for c in checkpoints),
                       mean=cum.mean(axis=0), stderr=stderr(cum), trials=n,
                       realized_mean=cum_real.mean(axis=0), realized_stderr=stderr(cum_real))


def run_experiment(config, progress=False):
    """
    Regret curve per policy. Frequentist mode keeps theta* fixed across
    trials; Bayesian mode draws theta* from the prior in each trial.
    """
    for name in config.policies:
        validate_policy_name(name)
    checkpoints = resolve_checkpoints(config)
    curves = {}
    for name in config.policies:
        logger.info("running %s: policy=%s trials=%d horizon=%d mode=%s",
                    config.name, name, config.trials, config.horizon, config.regret_mode)
        trajectories = run_policy_trials(config, name, progress=progress)
        curves[name] = aggregate_curve(name, trajectories, checkpoints)
        logger.info("%s: mean cumulative regret at T=%d is %.6g (stderr %.3g)",
                    name, checkpoints[-1], curves[name].mean[-1], curves[name].stderr[-1])
    return curves


def sublinearity_ratio(curve, t1, t2):
    """mean regret(t2) / mean regret(t1) for t2 = 2 t1; sqrt(2) for sqrt(T) growth"""
    if t2 != 2 * t1:
        raise DomainError(f"need t2 = 2 * t1, got t1={t1}, t2={t2}")
    denominator = curve.at(t1)
    if denominator == 0:
        raise DomainError(f"zero regret at period {t1}; ratio undefined")
    return curve.at(t2) / denominator


def frequentist_worst_curve(config, thetas):
    """
    Pointwise maximum of the frequentist curves over a grid of theta*, per
    policy; the benchmark a Bayesian regret curve should stay below.
    """
    if not isinstance(config.demand, WeibullParams):
        raise DomainError("worst-case curves need Weibull demand")
    worst = {}
    for theta in thetas:
        sub = replace(config, regret_mode="frequentist",
                      demand=WeibullParams(float(theta), config.demand.k),
                      name=f"{config.name}@theta={theta:g}")
        for name, curve in run_experiment(sub).items():
            if name not in worst:
                worst[name] = curve
                continue
            best = worst[name]
            take = curve.mean > best.mean
            worst[name] = replace(best, mean=np.where(take, curve.mean, best.mean),
                                  stderr=np.where(take, curve.stderr, best.stderr))
    return worst
