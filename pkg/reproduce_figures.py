"""
Reproduce the regret-curve experiments
Runs every shipped preset (or the ones named on the command line), writes
results/<preset>.csv and prints the final-period ranking of each
"""

import os
import sys
from dotenv import load_dotenv

# Add the app directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'app'))

# Load environment variables
load_dotenv()

from config_loader import available_presets, parse_config
from models import LabError
from reporting import emit_regret_csv, log_run
from simulation import run_experiment

RESULTS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'results')


def reproduce(preset, overrides=()):
    """Run one preset and write its regret CSV"""
    config = parse_config(preset, overrides)
    print(f"\n{'='*60}")
    print(f"  {config.name}: {', '.join(config.policies)}")
    print(f"  T={config.horizon} trials={config.trials} service level={config.service_level:.0%}")
    print(f"{'='*60}")

    curves = run_experiment(config, progress=True)
    os.makedirs(RESULTS_DIR, exist_ok=True)
    out = os.path.join(RESULTS_DIR, f"{config.name}.csv")
    emit_regret_csv(curves, out)

    summary = []
    for rank, curve in enumerate(sorted(curves.values(), key=lambda c: c.mean[-1]), 1):
        line = f"{rank}. {curve.policy:<10} {curve.mean[-1]:10.4f} +- {curve.stderr[-1]:.4f}"
        print(f"  {line}")
        summary.append(line)
    print(f"  saved to {out}")
    log_run(config.name, 'reproduce', summary)
    return curves


def main():
    args = sys.argv[1:]
    overrides = []
    if '--set' in args:
        idx = args.index('--set')
        overrides = args[idx + 1:]
        args = args[:idx]
    presets = args or available_presets()

    if not presets:
        print("Usage: python reproduce_figures.py [preset ...] [--set key=value ...]")
        print("No presets found.")
        sys.exit(1)

    for preset in presets:
        try:
            reproduce(preset, overrides)
        except LabError as e:
            print(f"\nError in {preset}: {e}")
            sys.exit(2)


if __name__ == "__main__":
    main()
