"""
Empirical checks of the regret analysis on simulated trajectories:
posterior concentration, the M_t martingale, the inverse-Gamma lower-bound
event, KM band coverage and plug-in dominance
"""

import math
from dataclasses import replace

import numpy as np

from demand import demand_range
from km_estimation import (
    km_band_statistic,
    km_cdf,
    km_confidence_width,
    km_fit,
    km_grid,
    plugin_fit,
    sup_distance,
    weibull_cdf_curve,
)
from models import CensoredObservation, DomainError
from simulation import run_policy_trials, trial_rng
from theory_bounds import martingale_bound_Mt, min_ratio, posterior_confidence_width


def binomial_stderr(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n else 0.0


def posterior_path(trajectory, prior, k):
    """(alpha_t, beta_t) after t = 1..T observations, summed from the log"""
    alpha = prior.alpha + np.cumsum(trajectory.uncensored.astype(float))
    beta = prior.beta + np.cumsum(trajectory.sales ** k)
    return alpha, beta


def conjugacy_residual(trajectory, prior, k):
    """
    Largest gap between the posterior the policy carried and the brute-force
    sums; returns (alpha gap, relative beta gap)
    """
    if trajectory.posterior_alpha is None:
        raise DomainError(f"{trajectory.policy} keeps no posterior")
    alpha, beta = posterior_path(trajectory, prior, k)
    # recorded values are the posterior in force before each order
    rec_a = trajectory.posterior_alpha[1:]
    rec_b = trajectory.posterior_beta[1:]
    if rec_a.size == 0:
        return 0.0, 0.0
    return (float(np.max(np.abs(rec_a - alpha[:-1]))),
            float(np.max(np.abs(rec_b - beta[:-1]) / beta[:-1])))


def ts_trajectories(config, score=False):
    """Thompson Sampling runs without expected-cost bookkeeping"""
    return run_policy_trials(config, "ts", score=score)


def posterior_width_violations(trajectories, prior, k, theta_star, d_high, delta):
    """
    Fraction of (trial, t) pairs with |beta_t / (alpha_t - 1) - 1/theta*| > eps_t.
    Returns (fraction, allowance sum_t delta / t**2, binomial stderr).
    """
    violations = 0
    pairs = 0
    horizon = 0
    for tr in trajectories:
        alpha, beta = posterior_path(tr, prior, k)
        horizon = max(horizon, len(alpha))
        for t in range(1, len(alpha) + 1):
            a, b = alpha[t - 1], beta[t - 1]
            if a <= 1:
                continue
            eps = posterior_confidence_width(t, a, theta_star, d_high, k, delta)
            pairs += 1
            if abs(b / (a - 1.0) - 1.0 / theta_star) > eps:
                violations += 1
    fraction = violations / pairs if pairs else 0.0
    allowance = sum(delta / (t * t) for t in range(1, horizon + 1))
    return fraction, allowance, binomial_stderr(fraction, pairs)


def martingale_path(trajectory, theta_star, k):
    """M_t = sum_{i<t} (delta_i - P(D_i < y_i)) - 1, for t = 1..T"""
    p_below = -np.expm1(-theta_star * trajectory.orders ** k)
    return np.cumsum(trajectory.uncensored.astype(float) - p_below) - 1.0


def alpha_representation_residual(trajectory, prior, theta_star, k):
    """alpha0 + sum(1 - exp(-theta* y_i**k)) + M_t + 1 - alpha_t, per t; zero up to rounding"""
    alpha, _ = posterior_path(trajectory, prior, k)
    drift = np.cumsum(-np.expm1(-theta_star * trajectory.orders ** k))
    return prior.alpha + drift + martingale_path(trajectory, theta_star, k) + 1.0 - alpha


def martingale_bound_violations(trajectories, theta_star, k, delta):
    """Fraction of (trial, t) pairs where the centred sum |M_t + 1| exceeds sqrt(8t) ln(2t**2/delta)"""
    violations = 0
    pairs = 0
    for tr in trajectories:
        centred = np.abs(martingale_path(tr, theta_star, k) + 1.0)
        bounds = np.array([martingale_bound_Mt(t, delta) for t in range(1, len(centred) + 1)])
        violations += int(np.sum(centred > bounds))
        pairs += len(centred)
    fraction = violations / pairs if pairs else 0.0
    return fraction, binomial_stderr(fraction, pairs)


def inverse_gamma_event_frequency(alpha, beta, draws, rng):
    """Frequency of 1/theta <= beta / (2 alpha) over Gamma(alpha, beta) draws, with its stderr"""
    theta = rng.gamma(alpha, 1.0 / beta, size=draws)
    fraction = float(np.mean(1.0 / theta <= beta / (2.0 * alpha)))
    return fraction, binomial_stderr(fraction, draws)


def ts_lower_bound_event_frequency(trajectories, cp, k):
    """
    Frequency over TS rounds of 1/theta_t <= beta_{t-1} / (2 alpha_{t-1}). The
    sampled theta_t is recovered from the order, which is a bijection of it.
    """
    log_term = -math.log(cp.h / (cp.p + cp.h))
    hits = 0
    rounds = 0
    for tr in trajectories:
        theta = log_term / tr.orders ** k
        hits += int(np.sum(1.0 / theta <= tr.posterior_beta / (2.0 * tr.posterior_alpha)))
        rounds += len(theta)
    fraction = hits / rounds if rounds else 0.0
    return fraction, binomial_stderr(fraction, rounds)


def posterior_ratio_floor(trajectory, prior, k):
    """
    (beta_T / alpha_T, smallest term ratio) over the sequences
    (beta0, min(y_i, D_i)**k) and (alpha0, delta_i); the first never falls below
    the second
    """
    a = np.concatenate(([prior.beta], trajectory.sales ** k))
    b = np.concatenate(([prior.alpha], trajectory.uncensored.astype(float)))
    return min_ratio(a, b)


def ratio_floor_violations(trajectories, prior, k, d_low):
    """Share of trajectories whose final beta_T / alpha_T drops below min(beta0 / alpha0, d_low**k)"""
    floor = min(prior.beta / prior.alpha, d_low ** k)
    misses = sum(1 for tr in trajectories if posterior_ratio_floor(tr, prior, k)[0] < floor)
    fraction = misses / len(trajectories) if trajectories else 0.0
    return fraction, binomial_stderr(fraction, len(trajectories))


def km_band_coverage(theta, k, censor_level, t, delta, trials, seed):
    """
    Coverage of sup_x |(1 - G(x))(F_km - F)(x)| <= sqrt(ln(1/delta) / (2t))
    when every order equals censor_level, so G is the unit step at that level.
    """
    eps = km_confidence_width(t, delta, 0.0)
    true_cdf = weibull_cdf_curve(theta, k)
    censoring_cdf = lambda x: (np.asarray(x, dtype=float) >= censor_level).astype(float)
    covered = 0
    for trial in range(trials):
        rng = trial_rng(seed, trial, 0)
        demands = (-np.log1p(-rng.random(t)) / theta) ** (1.0 / k)
        obs = [CensoredObservation.from_demand(censor_level, float(d)) for d in demands]
        estimate = km_fit(obs)
        if km_band_statistic(estimate, true_cdf, censoring_cdf) <= eps:
            covered += 1
    fraction = covered / trials
    return fraction, binomial_stderr(fraction, trials)


def plugin_dominance_gap(observations, theta_star, k):
    """sup|F_theta_hat - F_km| - sup|F_theta* - F_km|; never positive beyond rounding"""
    estimate = km_fit(observations)
    fit = plugin_fit(estimate, k)
    grid = km_grid(estimate)
    km = km_cdf(estimate)
    d_hat = sup_distance(weibull_cdf_curve(fit.theta_hat, k), km, grid)
    d_star = sup_distance(weibull_cdf_curve(theta_star, k), km, grid)
    return d_hat - d_star


def coverage_report(config, trials=None):
    """Posterior-width, martingale and lower-bound-event frequencies for a Weibull configuration"""
    theta_star, k, delta = config.demand.theta, config.k, config.delta
    trajectories = ts_trajectories(config if trials is None else replace(config, trials=trials))
    dr = demand_range(theta_star, k, config.horizon, delta)
    width = posterior_width_violations(trajectories, config.prior, k, theta_star, dr.d_high, delta)
    mart = martingale_bound_violations(trajectories, theta_star, k, delta)
    event = ts_lower_bound_event_frequency(trajectories, config.cost, k)
    floor = ratio_floor_violations(trajectories, config.prior, k, dr.d_low)
    return {
        "posterior_width_violation": width[0],
        "posterior_width_allowance": width[1],
        "posterior_width_stderr": width[2],
        "martingale_violation": mart[0],
        "martingale_stderr": mart[1],
        "lower_bound_event": event[0],
        "lower_bound_event_stderr": event[1],
        "ratio_floor_violation": floor[0],
        "ratio_floor_stderr": floor[1],
    }
