"""
Shared fixtures for the lab tests
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'app'))

from models import CostParams, ExperimentConfig, GammaParams, WeibullParams  # noqa: E402


class FixedUniform:
    """Random stream whose uniform draw is fixed"""

    def __init__(self, u):
        self.u = u

    def random(self, size=None):
        return self.u


class FixedGamma:
    """Random stream whose Gamma draw is fixed; records the requested shape and scale"""

    def __init__(self, value):
        self.value = value
        self.calls = []

    def gamma(self, shape, scale):
        self.calls.append((shape, scale))
        return self.value


@pytest.fixture
def even_costs():
    return CostParams(h=1.0, p=1.0)


@pytest.fixture
def prior44():
    return GammaParams(alpha=4.0, beta=4.0)


@pytest.fixture
def make_config(even_costs, prior44):
    """Small Weibull(1, 1) experiment; keyword arguments override fields"""
    def _make(**overrides):
        fields = dict(horizon=40, trials=3, seed=1234, cost=even_costs,
                      demand=WeibullParams(1.0, 1.0), prior=prior44,
                      policies=("ts",), checkpoints=(10, 20, 40))
        fields.update(overrides)
        return ExperimentConfig(**fields)
    return _make


@pytest.fixture(autouse=True)
def isolated_run_log(tmp_path, monkeypatch):
    """Keep run-log entries out of the working tree"""
    from config_loader import runtime_config
    monkeypatch.setitem(runtime_config, 'log_dir', str(tmp_path / 'logs'))
