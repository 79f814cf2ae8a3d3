"""
Output files of the lab: regret CSVs, bound reports, KM step functions,
the PDF summary and the per-day run log
"""

import logging
import math
import os
from datetime import datetime

import pandas as pd
from reportlab.lib.pagesizes import letter
from reportlab.pdfgen import canvas

from config_loader import runtime_config
from models import CensoredObservation, ConfigError, DomainError

logger = logging.getLogger(__name__)

REGRET_COLUMNS = ["period", "policy", "mean_cum_regret", "stderr", "trials"]
BOUND_KEYS = ("L", "T0", "C0", "theorem1_bound")
SIGNIFICANT_DIGITS = 6


def format_number(value, digits=SIGNIFICANT_DIGITS):
    """Positional decimal with a fixed number of significant digits; zero is 0.000000"""
    value = float(value)
    if value == 0.0:
        return "0." + "0" * digits
    if not math.isfinite(value):
        return str(value)
    # round to significance first so 9.9999996 becomes 10.0000, not 9.99999
    rounded = float(f"{value:.{digits - 1}e}")
    decimals = digits - 1 - math.floor(math.log10(abs(rounded)))
    return f"{rounded:.{max(decimals, 0)}f}"


def _check_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise DomainError(f"cannot write {path}: directory {parent} does not exist")


def regret_frame(curves, column="pseudo"):
    """Rows of the regret CSV, sorted by (policy, period), numbers already formatted"""
    if not curves:
        raise DomainError("no regret curves to write")
    if column not in ("pseudo", "realized"):
        raise DomainError(f"column must be 'pseudo' or 'realized', got {column!r}")
    rows = []
    for name in sorted(curves):
        curve = curves[name]
        mean = curve.mean if column == "pseudo" else curve.realized_mean
        err = curve.stderr if column == "pseudo" else curve.realized_stderr
        for period, m, s in zip(curve.periods, mean, err):
            rows.append((int(period), curve.policy, format_number(m), format_number(s), int(curve.trials)))
    return pd.DataFrame(rows, columns=REGRET_COLUMNS)


def emit_regret_csv(curves, path, column="pseudo"):
    """Write `period,policy,mean_cum_regret,stderr,trials` as UTF-8 with LF endings"""
    frame = regret_frame(curves, column)
    _check_parent(path)
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    logger.info("wrote %d regret rows to %s", len(frame), path)


def read_regret_csv(path):
    frame = pd.read_csv(path, dtype={"policy": str})
    missing = [c for c in REGRET_COLUMNS if c not in frame.columns]
    if missing:
        raise DomainError(f"{path}: missing columns {missing}")
    return frame


def emit_bound_report(report, path):
    """Four key=value lines, then a `t,epsilon_t` CSV section"""
    _check_parent(path)
    lines = [f"{key}={report_value(getattr(report, key))}" for key in BOUND_KEYS]
    lines.append("t,epsilon_t")
    lines.extend(f"{t},{report_value(eps)}" for t, eps in enumerate(report.epsilons, 1))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    logger.info("wrote bound report (%d epsilon rows) to %s", len(report.epsilons), path)


def report_value(value):
    return "%.10g" % value


def read_bound_report(path):
    """(dict of the key=value header, DataFrame of epsilon_t)"""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    header = {}
    for i, line in enumerate(lines):
        if line == "t,epsilon_t":
            rows = [tuple(r.split(",")) for r in lines[i + 1:] if r]
            frame = pd.DataFrame([(int(t), float(e)) for t, e in rows], columns=["t", "epsilon_t"])
            return header, frame
        key, value = line.split("=", 1)
        header[key] = float(value)
    raise DomainError(f"{path}: no epsilon_t section")


def read_km_input(path):
    """Censored observations from a `sale,censored` CSV; censored=1 marks a stock-out"""
    if not os.path.exists(path):
        raise ConfigError("in", f"input file not found: {path}")
    frame = pd.read_csv(path)
    if list(frame.columns) != ["sale", "censored"]:
        raise ConfigError("in", f"expected header sale,censored, got {','.join(map(str, frame.columns))}")
    if frame.empty:
        raise DomainError("no observations in KM input")
    if not frame["censored"].isin([0, 1]).all():
        raise DomainError("censored must be 0 or 1")
    observations = []
    for sale, censored in frame.itertuples(index=False):
        sale = float(sale)
        # a censored sale is a stock-out: the order equalled the sale
        observations.append(CensoredObservation(order=sale if censored else math.inf,
                                                sale=sale, uncensored=not censored))
    return observations


def emit_km_csv(estimate, path):
    _check_parent(path)
    frame = pd.DataFrame({
        "x": [report_value(x) for x in estimate.breakpoints],
        "survival": [report_value(s) for s in estimate.survival],
    })
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")


def generate_pdf_report(config, curves, pdf_path):
    """One-page-per-overflow summary: final-period ranking, then every checkpoint"""
    _check_parent(pdf_path)
    pdf = canvas.Canvas(pdf_path, pagesize=letter)
    pdf.setTitle(f"Regret summary: {config.name}")
    pdf.setFont("Helvetica", 11)

    x, y = 40, 750
    line_height = 14

    def line(text, bold=False):
        nonlocal y
        if y < 60:
            pdf.showPage()
            y = 750
        pdf.setFont("Helvetica-Bold" if bold else "Helvetica", 11)
        pdf.drawString(x, y, text)
        y -= line_height

    line(f"Configuration: {config.name}", bold=True)
    line(f"Horizon: {config.horizon}   Trials: {config.trials}   Seed: {config.seed}   Mode: {config.regret_mode}")
    line(f"Costs: h={config.cost.h:g} p={config.cost.p:g} (service level {config.service_level:.1%})")
    line(f"Prior: alpha0={config.prior.alpha:g} beta0={config.prior.beta:g}   Demand: {config.demand}")
    y -= line_height

    line("Mean cumulative regret at the horizon", bold=True)
    final = sorted(curves.values(), key=lambda c: c.mean[-1])
    for rank, curve in enumerate(final, 1):
        line(f"{rank}. {curve.policy:<12} {format_number(curve.mean[-1]):>14}  "
             f"stderr {format_number(curve.stderr[-1])}")
    y -= line_height

    line("Checkpoints", bold=True)
    names = sorted(curves)
    line("period  " + "  ".join(f"{n:>12}" for n in names))
    for i, period in enumerate(curves[names[0]].periods):
        line(f"{period:>6}  " + "  ".join(f"{format_number(curves[n].mean[i]):>12}" for n in names))

    pdf.save()
    logger.info("PDF report saved to %s", pdf_path)
    return pdf_path


def log_run(config_name, subcommand, summary, is_error=False):
    """Append a framed entry to the per-day run log; never raises"""
    try:
        logs_dir = runtime_config['log_dir']
        os.makedirs(logs_dir, exist_ok=True)

        current_date = datetime.now().strftime('%Y%m%d')
        log_filename = f"{logs_dir}/run_log_{current_date}.txt"

        timestamp = datetime.now().strftime('%Y-%m-%d %H:%M:%S')
        separator = "=" * 80

        log_entry = f"\n{separator}\n"
        log_entry += f"Config: {config_name}\n"
        log_entry += f"Subcommand: {subcommand}\n"
        log_entry += f"Timestamp: {timestamp}\n"
        log_entry += "Status: ERROR\n" if is_error else "Status: SUCCESS\n"
        log_entry += f"{separator}\n\n"
        log_entry += "\n".join(summary) + "\n\n"
        log_entry += f"{separator}\n"

        with open(log_filename, 'a', encoding='utf-8') as f:
            f.write(log_entry)

    except Exception:
        pass
