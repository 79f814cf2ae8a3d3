"""
Tests for the bound evaluators, each checked against an independently
written evaluation of the same formula
"""

import math

import numpy as np
import pytest

from demand import demand_range
from models import CostParams, DomainError, GammaParams
from theory_bounds import (
    alpha_t_floor,
    bound_report,
    constant_C0,
    inverse_gamma_tail,
    lower_bound_L,
    martingale_bound_Mt,
    min_ratio,
    posterior_confidence_width,
    theorem1_bound,
    theorem2_bound,
    theoretical_alpha0,
    truncation_T0,
)


# Oracle evaluations, written from the formulas without sharing helpers

def oracle_L(h, p, k, alpha0, beta0, d_low):
    return (0.5 * math.log((p + h) / h)) ** (1 / k) * min((beta0 / alpha0) ** (1 / k), d_low)


def oracle_T0(theta, L, k, T, delta):
    return 64 * math.log(T / delta) / (-math.expm1(-theta * L ** k)) ** 2


def oracle_eps(t, alpha_t, theta, d_high, k, delta):
    return math.sqrt(math.log(2 * t ** 2 / delta)) * (d_high ** k + 2 / theta) * math.sqrt(t) / (alpha_t - 1)


def oracle_Mt(t, delta):
    return math.sqrt(8 * t) * math.log(2 * t ** 2 / delta)


def oracle_theorem1(h, p, k, theta, L, d_high, T, delta):
    q = -math.expm1(-theta * L ** k)
    c0 = (max(h, p) * math.log((p + h) / h) ** (1 / k) * (d_high ** k + 2 / theta) / k
          * min(L, 1 / theta) ** (1 / k - 1) * math.sqrt(2 * math.log(T / delta)))
    return c0 * (512 / q ** 3 * math.log(T / delta) ** 1.5 + 4 / q * math.sqrt(T))


def oracle_theorem2(lip, h, p, g_max, T, delta):
    return 16 * lip * (h + p) / (1 - g_max) * math.sqrt(T * math.log(1 / delta))


class TestLowerBoundL:

    def test_prior_binds(self, even_costs, prior44):
        assert lower_bound_L(even_costs, 1.0, prior44, 1.0) == pytest.approx(math.log(2) / 2, rel=1e-12)

    def test_demand_floor_binds(self, even_costs, prior44):
        assert lower_bound_L(even_costs, 1.0, prior44, 8.3337e-5) == pytest.approx(2.8882e-5, rel=1e-4)

    def test_shape_two(self, even_costs, prior44):
        assert lower_bound_L(even_costs, 2.0, prior44, 1.0) == pytest.approx(0.588705, abs=1e-6)

    def test_zero_floor(self, even_costs, prior44):
        with pytest.raises(DomainError):
            lower_bound_L(even_costs, 1.0, prior44, 0.0)


class TestTruncationT0:

    def test_direct(self):
        value = truncation_T0(1.0, 1.0, 1.0, 600, 0.1)
        assert value == pytest.approx(64 / (1 - math.exp(-1)) ** 2 * math.log(6000), rel=1e-12)
        assert value == pytest.approx(1393.4, rel=1e-4)

    def test_certain_censoring_gap(self):
        assert truncation_T0(1e3, 1.0, 1.0, 600, 0.1) == pytest.approx(64 * math.log(6000), rel=1e-12)

    def test_vanishing_L(self):
        assert truncation_T0(1.0, 0.0, 1.0, 600, 0.1) == math.inf
        assert truncation_T0(1.0, 1e-200, 1.0, 600, 0.1) == math.inf


class TestPosteriorWidth:

    def test_direct(self):
        value = posterior_confidence_width(100, 51, 1.0, 9.39266, 1.0, 0.1)
        assert value == pytest.approx(oracle_eps(100, 51, 1.0, 9.39266, 1.0, 0.1), rel=1e-12)
        assert value == pytest.approx(7.9599, rel=1e-3)

    def test_homogeneous_in_alpha(self):
        one = posterior_confidence_width(50, 11.0, 2.0, 4.0, 1.5, 0.05)
        two = posterior_confidence_width(50, 21.0, 2.0, 4.0, 1.5, 0.05)
        assert two == pytest.approx(one / 2, rel=1e-14)

    def test_vanishing_delta(self):
        assert posterior_confidence_width(10, 5, 1.0, 3.0, 1.0, 1e-300) > posterior_confidence_width(10, 5, 1.0, 3.0, 1.0, 0.1) * 5

    @pytest.mark.parametrize("alpha_t", [1.0, 0.5])
    def test_alpha_at_most_one(self, alpha_t):
        with pytest.raises(DomainError):
            posterior_confidence_width(10, alpha_t, 1.0, 3.0, 1.0, 0.1)


class TestMartingaleBound:

    def test_direct(self):
        assert martingale_bound_Mt(100, 0.1) == pytest.approx(math.sqrt(800) * math.log(200000), rel=1e-12)
        assert martingale_bound_Mt(100, 0.1) == pytest.approx(345.24, abs=0.01)

    def test_log_of_one(self):
        assert martingale_bound_Mt(1, 2.0) == 0.0

    def test_monotone(self):
        values = [martingale_bound_Mt(t, 0.1) for t in range(1, 500)]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestInverseGammaTail:

    def test_alpha_four(self):
        assert inverse_gamma_tail(4) == pytest.approx((2 / math.e) ** 4, rel=1e-12)
        assert inverse_gamma_tail(4) == pytest.approx(0.293050, abs=1e-6)

    def test_large_alpha(self):
        assert inverse_gamma_tail(1e4) < 1e-300

    def test_theoretical_prior(self):
        alpha0 = theoretical_alpha0(600, 0.1)
        assert inverse_gamma_tail(alpha0) == pytest.approx(0.1 / 600, rel=1e-9)


class TestTheorem1:

    def test_matches_oracle(self, even_costs, prior44):
        value = theorem1_bound(even_costs, 1.0, 1.0, 0.346574, 9.39266, 600, 0.1, prior44)
        assert math.isfinite(value)
        assert value == pytest.approx(oracle_theorem1(1, 1, 1.0, 1.0, 0.346574, 9.39266, 600, 0.1), rel=1e-9)

    def test_sqrt_growth(self, even_costs):
        small = theorem1_bound(even_costs, 1.0, 1.0, 0.3, 9.0, 1e16, 0.1)
        large = theorem1_bound(even_costs, 1.0, 1.0, 0.3, 9.0, 4e16, 0.1)
        assert large / small == pytest.approx(2.0, rel=0.05)

    def test_decreasing_in_L(self, even_costs):
        values = [theorem1_bound(even_costs, 1.0, 1.0, L, 9.39266, 600, 0.1) for L in np.geomspace(0.01, 2, 30)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_C0_matches_oracle_component(self):
        cp = CostParams(1 / 9, 1.0)
        c0 = constant_C0(cp, 2.0, 1.5, 0.4, 3.0, 600, 0.1)
        expected = (1.0 * math.log(10) ** 0.5 * (9.0 + 2 / 1.5) / 2 * 0.4 ** -0.5 * math.sqrt(2 * math.log(6000)))
        assert c0 == pytest.approx(expected, rel=1e-12)


class TestTheorem2:

    def test_direct(self, even_costs):
        value = theorem2_bound(1.0, even_costs, 0.5, 100, 0.1)
        assert value == pytest.approx(64 * math.sqrt(100 * math.log(10)), rel=1e-12)
        assert value == pytest.approx(971.15, abs=0.01)

    def test_linear_in_costs(self, even_costs):
        assert theorem2_bound(1.0, CostParams(2, 2), 0.3, 50, 0.2) == pytest.approx(
            2 * theorem2_bound(1.0, even_costs, 0.3, 50, 0.2), rel=1e-14)

    def test_heavy_censoring(self, even_costs):
        assert theorem2_bound(1.0, even_costs, 1 - 1e-12, 100, 0.1) > 1e14
        with pytest.raises(DomainError):
            theorem2_bound(1.0, even_costs, 1.0, 100, 0.1)


class TestAlphaFloor:

    def test_before_truncation(self, prior44):
        assert alpha_t_floor(10, 1393, prior44, 1.0, 1.0, 1.0) == 3.0

    def test_after_truncation(self, prior44):
        value = alpha_t_floor(2000, 1393, prior44, 1.0, 1.0, 1.0)
        assert value == pytest.approx(1000 * (1 - math.exp(-1)), rel=1e-12)
        assert value == pytest.approx(632.12, abs=0.01)


class TestMinRatio:

    def test_ratio_of_sums_dominates(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            a = rng.uniform(0, 5, 10)
            b = rng.uniform(0, 5, 10)
            total, smallest = min_ratio(a, b)
            assert total >= smallest - 1e-12

    def test_example(self):
        assert min_ratio([1, 2], [1, 1]) == (1.5, 1.0)

    def test_needs_positive_b(self):
        with pytest.raises(DomainError):
            min_ratio([1, 2], [0, 0])


class TestRandomOracle:
    """Every evaluator against its oracle over 50 random parameter draws"""

    def test_fifty_draws(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            h, p = rng.uniform(0.02, 3, 2)
            k = rng.uniform(0.5, 3)
            theta = rng.uniform(0.2, 5)
            alpha0, beta0 = rng.uniform(2, 30, 2)
            T = int(rng.integers(10, 5000))
            delta = rng.uniform(0.01, 0.5)
            t = int(rng.integers(1, T + 1))
            cp, prior = CostParams(h, p), GammaParams(alpha0, beta0)

            dr = demand_range(theta, k, T, delta)
            L = lower_bound_L(cp, k, prior, dr.d_low)
            assert L == pytest.approx(oracle_L(h, p, k, alpha0, beta0, dr.d_low), rel=1e-9)
            assert truncation_T0(theta, L, k, T, delta) == pytest.approx(oracle_T0(theta, L, k, T, delta), rel=1e-9)

            alpha_t = alpha0 + rng.uniform(0, t)
            assert posterior_confidence_width(t, alpha_t, theta, dr.d_high, k, delta) == pytest.approx(
                oracle_eps(t, alpha_t, theta, dr.d_high, k, delta), rel=1e-9)
            assert martingale_bound_Mt(t, delta) == pytest.approx(oracle_Mt(t, delta), rel=1e-9)

            L_mid = rng.uniform(0.05, 2)
            assert theorem1_bound(cp, k, theta, L_mid, dr.d_high, T, delta, prior) == pytest.approx(
                oracle_theorem1(h, p, k, theta, L_mid, dr.d_high, T, delta), rel=1e-9)
            g_max = rng.uniform(0, 0.95)
            assert theorem2_bound(L_mid, cp, g_max, T, delta) == pytest.approx(
                oracle_theorem2(L_mid, h, p, g_max, T, delta), rel=1e-9)


class TestBoundReport:

    def test_figure_one_configuration(self, make_config):
        config = make_config(horizon=600)
        report = bound_report(config)
        dr = demand_range(1.0, 1.0, 600, 0.1)
        L = oracle_L(1, 1, 1.0, 4, 4, dr.d_low)
        assert report.L == pytest.approx(L, rel=1e-9)
        assert report.T0 == pytest.approx(oracle_T0(1.0, L, 1.0, 600, 0.1), rel=1e-9)
        assert report.theorem1_bound == pytest.approx(
            oracle_theorem1(1, 1, 1.0, 1.0, L, dr.d_high, 600, 0.1), rel=1e-9)
        assert len(report.epsilons) == 600
        # T0 exceeds the horizon here, so every alpha_t floor is alpha0 - 1
        assert report.epsilons[99] == pytest.approx(oracle_eps(100, 4.0, 1.0, dr.d_high, 1.0, 0.1), rel=1e-9)
