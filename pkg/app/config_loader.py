"""
Experiment configuration: flat key=value files with dotted keys, command-line
overrides, and process settings from the environment
"""

import os
from fractions import Fraction
from pathlib import Path

from dotenv import load_dotenv

from models import ConfigError, CostParams, DomainError, ExperimentConfig, GammaParams, NormalParams, WeibullParams
from policies import validate_policy_name
from simulation import default_checkpoints
from theory_bounds import theoretical_alpha0

load_dotenv()

REPO_DIR = Path(__file__).resolve().parent.parent

# Process-level settings
runtime_config = {
    'workers': int(os.getenv('LAB_WORKERS', '1')),
    'log_dir': os.getenv('LAB_LOG_DIR', 'logs'),
    'preset_dir': os.getenv('LAB_PRESET_DIR', str(REPO_DIR / 'presets')),
    'log_level': os.getenv('LAB_LOG_LEVEL', 'INFO'),
}

DEFAULTS = {
    'name': 'experiment',
    'horizon': '600',
    'trials': '100',
    'seed': '20240601',
    'regret_mode': 'frequentist',
    'checkpoints': 'every:10',
    'delta': '0.1',
    'policies': 'ts',
    'cost.h': '1',
    'cost.p': '1',
    'demand.family': 'weibull',
    'demand.theta': '1',
    'demand.k': '1',
    'demand.mu': '10',
    'demand.sigma': '2',
    'prior.alpha': '4',
    'prior.beta': '4',
    'prior.theoretical': 'false',
    'ucb.width_scale': '1',
    'ucb.theta_min': '1e-6',
    'oco.eta0': '',
    'oco.y_max': '',
}
KNOWN_KEYS = frozenset(DEFAULTS) | {'workers'}


def preset_path(name):
    """Resolve a preset name like 'figure1-50pct' or a path to a config file"""
    candidate = Path(name)
    if candidate.suffix and candidate.exists():
        return candidate
    preset = Path(runtime_config['preset_dir']) / f"{name}.cfg"
    if preset.exists():
        return preset
    if candidate.exists():
        return candidate
    raise ConfigError('config', f"config file not found: {name}")


def available_presets():
    return sorted(p.stem for p in Path(runtime_config['preset_dir']).glob('*.cfg'))


def read_key_values(lines, source):
    """Parse key=value lines; '#' starts a comment"""
    values = {}
    for number, raw in enumerate(lines, 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"{source}:{number}", f"expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown key")
        values[key] = value
    return values


def _number(values, key, cast=float):
    raw = values[key]
    try:
        number = Fraction(raw) if '/' in raw else raw
        return cast(float(number)) if cast is not int else int(raw)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(key, f"not a number: {raw!r}")


def _optional_number(values, key):
    return None if values[key] == '' else _number(values, key)


def _boolean(values, key):
    raw = values[key].lower()
    if raw in ('true', '1', 'yes'):
        return True
    if raw in ('false', '0', 'no'):
        return False
    raise ConfigError(key, f"not a boolean: {values[key]!r}")


def _checkpoints(values, horizon):
    raw = values['checkpoints']
    if raw.startswith('every:'):
        try:
            step = int(raw.split(':', 1)[1])
        except ValueError:
            raise ConfigError('checkpoints', f"bad step in {raw!r}")
        if step < 1:
            raise ConfigError('checkpoints', "step must be >= 1")
        return default_checkpoints(horizon, step)
    try:
        return tuple(int(x) for x in raw.split(',') if x.strip())
    except ValueError:
        raise ConfigError('checkpoints', f"not a list of periods: {raw!r}")


def _positive(values, key):
    value = _number(values, key)
    if not value > 0:
        raise ConfigError(key, f"must be positive, got {value}")
    return value


def build_config(values):
    """ExperimentConfig from a complete key -> string mapping"""
    horizon = _number(values, 'horizon', int)
    delta = _number(values, 'delta')

    cost = CostParams(h=_positive(values, 'cost.h'), p=_positive(values, 'cost.p'))

    family = values['demand.family'].lower()
    k = _number(values, 'demand.k')
    if k <= 0:
        raise ConfigError('demand.k', f"must be positive, got {k}")
    try:
        if family == 'weibull':
            demand = WeibullParams(theta=_number(values, 'demand.theta'), k=k)
        elif family == 'normal':
            demand = NormalParams(mu=_number(values, 'demand.mu'), sigma=_number(values, 'demand.sigma'))
        else:
            raise ConfigError('demand.family', f"expected weibull or normal, got {family!r}")
    except DomainError as exc:
        raise ConfigError(f"demand.{'theta' if family == 'weibull' else 'sigma'}", str(exc))

    if _boolean(values, 'prior.theoretical'):
        if not 0 < delta < 1 or horizon < 1:
            raise ConfigError('prior.theoretical', "needs a valid horizon and delta")
        alpha = theoretical_alpha0(horizon, delta)
    else:
        alpha = _positive(values, 'prior.alpha')
    prior = GammaParams(alpha=alpha, beta=_positive(values, 'prior.beta'))

    policies = tuple(p.strip() for p in values['policies'].split(',') if p.strip())
    for name in policies:
        try:
            validate_policy_name(name)
        except KeyError as exc:
            raise ConfigError('policies', str(exc))

    workers = _number(values, 'workers', int) if 'workers' in values else runtime_config['workers']

    return ExperimentConfig(
        horizon=horizon,
        trials=_number(values, 'trials', int),
        seed=_number(values, 'seed', int),
        cost=cost,
        demand=demand,
        prior=prior,
        policies=policies,
        regret_mode=values['regret_mode'],
        checkpoints=_checkpoints(values, horizon) if horizon >= 1 else (),
        name=values['name'],
        k=k,
        delta=delta,
        ucb_width_scale=_number(values, 'ucb.width_scale'),
        theta_min=_number(values, 'ucb.theta_min'),
        oco_eta0=_optional_number(values, 'oco.eta0'),
        oco_y_max=_optional_number(values, 'oco.y_max'),
        workers=workers,
    )


def parse_config(path, overrides=()):
    """
    Read a config file (or preset name), apply key=value overrides after the
    file values, and validate. Errors name the offending key.
    """
    file_path = preset_path(str(path))
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            file_values = read_key_values(f, file_path.name)
    except OSError as exc:
        raise ConfigError('config', f"cannot read {file_path}: {exc}")

    values = dict(DEFAULTS)
    values['name'] = file_path.stem
    values.update(file_values)
    values.update(read_key_values(overrides, 'override'))
    return build_config(values)
