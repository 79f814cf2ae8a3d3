"""
Censored Newsvendor Lab - command-line entry point
Runs regret experiments, prints theory-bound reports and fits Kaplan-Meier
estimates from censored sales
"""

import argparse
import logging
import sys
from dataclasses import replace

from config_loader import parse_config, runtime_config
from diagnostics import coverage_report
from km_estimation import km_band_statistic, km_fit, plugin_fit, weibull_cdf_curve
from models import ConfigError, InsufficientDataError, UnknownPolicyError, WeibullParams
from policies import validate_policy_name
from reporting import (
    emit_bound_report,
    emit_km_csv,
    emit_regret_csv,
    generate_pdf_report,
    log_run,
    read_km_input,
)
from simulation import run_experiment
from theory_bounds import bound_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser():
    parser = argparse.ArgumentParser(prog="newsvendor-lab", description="Censored newsvendor regret lab")
    parser.add_argument("--quiet", action="store_true", help="no banner, no progress bar")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_args(p):
        p.add_argument("--config", required=True, help="config file or preset name")
        p.add_argument("--out", required=True, help="regret CSV path")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--realized-out", help="also write realized-cost regret here")
        p.add_argument("--workers", type=int, help="parallel trial workers")

    run = sub.add_parser("run", help="run the configured policies (or one with --policy)")
    experiment_args(run)
    run.add_argument("--policy", help="run only this policy")

    compare = sub.add_parser("compare", help="run every configured policy and rank them")
    experiment_args(compare)
    compare.add_argument("--pdf", help="also write a PDF summary")

    bounds = sub.add_parser("bounds", help="evaluate the regret-analysis constants")
    bounds.add_argument("--config", required=True)
    bounds.add_argument("--out", required=True)
    bounds.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    bounds.add_argument("--coverage-trials", type=int, default=0,
                        help="also simulate TS and print empirical coverage frequencies")

    km = sub.add_parser("km", help="Kaplan-Meier step function from a sale,censored CSV")
    km.add_argument("--in", dest="in_path", required=True)
    km.add_argument("--out", required=True)
    km.add_argument("--k", type=float, help="also print the plug-in Weibull rate for this shape")
    return parser


def print_banner(args, config_label):
    print(f"\n{'='*60}")
    print(f"  Censored Newsvendor Lab")
    print(f"{'='*60}")
    print(f"  Command: {args.command}")
    print(f"  Config: {config_label}")
    print(f"  Output: {args.out}")
    print(f"{'='*60}\n")


def load_experiment(args):
    config = parse_config(args.config, args.overrides)
    if getattr(args, "workers", None):
        config = replace(config, workers=args.workers)
    if getattr(args, "policy", None):
        try:
            validate_policy_name(args.policy)
        except UnknownPolicyError as e:
            raise ConfigError("policy", str(e))
        config = replace(config, policies=(args.policy,))
    return config


def cmd_experiment(args):
    config = load_experiment(args)
    curves = run_experiment(config, progress=not args.quiet)
    emit_regret_csv(curves, args.out)
    if args.realized_out:
        emit_regret_csv(curves, args.realized_out, column="realized")

    ranking = sorted(curves.values(), key=lambda c: c.mean[-1])
    summary = [f"{c.policy}: mean cumulative regret {c.mean[-1]:.6g} (stderr {c.stderr[-1]:.3g}) at T={c.periods[-1]}"
               for c in ranking]
    if args.command == "compare" and args.pdf:
        generate_pdf_report(config, curves, args.pdf)
        summary.append(f"PDF: {args.pdf}")
    return config.name, summary


def cmd_bounds(args):
    config = parse_config(args.config, args.overrides)
    if not isinstance(config.demand, WeibullParams):
        raise ConfigError("demand.family", "bounds need Weibull demand")
    report = bound_report(config)
    emit_bound_report(report, args.out)
    summary = [f"L={report.L:.6g}", f"T0={report.T0:.6g}", f"C0={report.C0:.6g}",
               f"theorem1_bound={report.theorem1_bound:.6g}"]
    if args.coverage_trials > 0:
        coverage = coverage_report(config, trials=args.coverage_trials)
        summary.extend(f"{key}={value:.6g}" for key, value in coverage.items())
    return config.name, summary


def cmd_km(args):
    observations = read_km_input(args.in_path)
    estimate = km_fit(observations)
    emit_km_csv(estimate, args.out)
    summary = [f"observations={estimate.sample_count}", f"breakpoints={len(estimate.breakpoints)}"]
    if args.k:
        try:
            fit = plugin_fit(estimate, args.k)
            summary.append(f"theta_hat={fit.theta_hat:.6g} sup_distance={fit.sup_distance:.6g}")
            band = km_band_statistic(estimate, weibull_cdf_curve(fit.theta_hat, args.k), observations=observations)
            summary.append(f"weighted_band_distance={band:.6g}")
        except InsufficientDataError as e:
            summary.append(f"plug-in fit skipped: {e}")
    return args.in_path, summary


COMMANDS = {"run": cmd_experiment, "compare": cmd_experiment, "bounds": cmd_bounds, "km": cmd_km}


def main(argv=None):
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=runtime_config['log_level'],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    label = getattr(args, "config", None) or getattr(args, "in_path", "")
    if not args.quiet:
        print_banner(args, label)

    try:
        name, summary = COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        log_run(label, args.command, [str(e)], is_error=True)
        return EXIT_CONFIG
    except Exception as e:
        logger.exception("%s failed", args.command)
        print(f"Error: {e}", file=sys.stderr)
        log_run(label, args.command, [str(e)], is_error=True)
        return EXIT_RUNTIME

    for line in summary:
        print(f"  {line}")
    log_run(name, args.command, summary)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
