"""Command-line front end: step, accumulate, sweep, bandgap, fit, compare.

All physical rates are in units of the first guided-mode decay rate and times
in its inverse.  Configuration files are YAML (nested keys); command-line
flags override config values.  Exit codes: 0 success, 1 usage or
configuration error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np
import yaml

from . import bandgap as bg
from . import formulas
from .fitting import InsufficientDataError, fit_loglog
from .sweep import (
    SweepConfigError,
    SweepSpec,
    evaluate_point,
    rows_to_csv,
    rows_to_jsonl,
    run_sweep,
    write_rows,
)


class UsageError(Exception):
    """Raised for bad flags or bad configuration (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _add_common(sub):
    sub.add_argument("--N", type=int, default=None, help="atoms per target mirror")
    sub.add_argument("--m", type=int, default=None, help="excitation sector")
    sub.add_argument("--p1d", type=float, default=None,
                     help="Purcell factor (guided rate / free-space rate); 'inf' allowed")
    sub.add_argument("--gamma-s-ratio", type=float, default=None, dest="gamma_s_ratio",
                     help="second guided rate over the first (default: optimal 1/sqrt(m))")
    sub.add_argument("--omega", type=float, default=None,
                     help="continuous drive strength (default: optimal)")
    sub.add_argument("--xi", type=float, default=None, help="interaction range (lattice units)")
    sub.add_argument("--T", type=float, default=None, help="evolution time (default: optimal)")
    sub.add_argument("--mode", choices=("hp-approx", "hp-exact"), default=None,
                     help="target-ensemble representation")
    sub.add_argument("--variant",
                     choices=("pi-pulse", "fixed-ratio", "continuous-drive", "fresh-level"),
                     default=None, help="protocol variant")
    sub.add_argument("--config", default=None, help="YAML config file (flags override)")
    sub.add_argument("--out", default=None, help="output path (default: stdout)")
    sub.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")
    sub.add_argument("--jsonl", action="store_true", help="emit JSON lines instead of CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wgherald",
                     description="Heralded collective-excitation protocol simulator")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("step", "run one heralded step"),
        ("accumulate", "chain heralded steps up to --m quanta"),
        ("sweep", "run a parameter sweep from a config file"),
        ("bandgap", "simulate the finite-range collective transfer"),
    ):
        sub = subs.add_parser(name, help=helptext)
        _add_common(sub)
    subs.choices["bandgap"].add_argument(
        "--profile-out", default=None,
        help="write the per-atom intensity/phase profile at the optimum here")

    fit = subs.add_parser("fit", help="fit a scaling law to CSV data")
    fit.add_argument("input", help="CSV file with a header row")
    fit.add_argument("--x", action="append", required=True,
                     help="regressor column (repeat for multiple)")
    fit.add_argument("--y", required=True, help="dependent column")
    fit.add_argument("--model", choices=("power_law", "exp_sqrt"), default="power_law")
    fit.add_argument("--out", default=None)

    comp = subs.add_parser("compare", help="protocol comparison table")
    for flag, typ, default in (("--N", int, 100), ("--m", int, 1),
                               ("--p1d", float, 10.0), ("--xi", float, 100.0),
                               ("--eta", float, 1.0), ("--x", float, 0.1)):
        comp.add_argument(flag, type=typ, default=default)
    comp.add_argument("--out", default=None)
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise UsageError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must be a mapping at top level")
    return cfg


def _overrides_from_args(args, protocol: str | None = None) -> dict:
    keys = ("N", "m", "p1d", "gamma_s_ratio", "omega", "xi", "T",
            "mode", "variant")
    over = {k: getattr(args, k, None) for k in keys}
    over["out"] = args.out
    over["jobs"] = getattr(args, "jobs", None)
    over["jsonl"] = getattr(args, "jsonl", False) or None
    if protocol is not None:
        over["protocol"] = protocol
    return over


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _single_point(args, protocol: str) -> int:
    cfg = _load_config(args.config)
    cfg.setdefault("axes", [])
    provided = set(cfg.get("fixed", {}))
    provided |= {k for k in ("N", "m", "p1d") if getattr(args, k, None) is not None}
    missing = [k for k in ("N", "m", "p1d") if k not in provided]
    if missing:
        raise UsageError(
            "missing required flag(s): " + " ".join(f"--{k}" for k in missing)
        )
    spec = SweepSpec.from_config(cfg, _overrides_from_args(args, protocol))
    row = evaluate_point(spec.points()[0])
    if row["error"]:
        sys.stderr.write(f"error: {row['error']}\n")
        return 2
    text = rows_to_jsonl([row]) if spec.jsonl else rows_to_csv([row])
    _emit(text, spec.out)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    spec = SweepSpec.from_config(cfg, _overrides_from_args(args))
    rows = run_sweep(spec)
    if spec.out:
        write_rows(rows, spec.out, spec.jsonl)
    else:
        _emit(rows_to_jsonl(rows) if spec.jsonl else rows_to_csv(rows), None)
    failures = sum(1 for r in rows if r["error"])
    if failures:
        sys.stderr.write(f"{failures}/{len(rows)} sweep points failed (see error column)\n")
    return 0


def _cmd_bandgap(args) -> int:
    cfg = _load_config(args.config)
    fixed = dict(cfg.get("fixed", {}))
    n = args.N if args.N is not None else int(fixed.get("N", 100))
    m = args.m if args.m is not None else int(fixed.get("m", 1))
    xi = args.xi if args.xi is not None else float(fixed.get("xi", 100.0))
    p1d = args.p1d if args.p1d is not None else float(fixed.get("p1d", math.inf))
    gamma_star = 0.0 if math.isinf(p1d) else 1.0 / p1d
    params = bg.BandgapParams(N=n, xi=xi, m=m, gamma_star=gamma_star)
    rec = bg.run_transfer(params)

    lines = ["t,source_population,target_population"]
    for t, ps, pt in zip(rec.times, rec.source_population, rec.target_population):
        lines.append(f"{t:.12g},{ps:.12g},{pt:.12g}")
    _emit("\n".join(lines) + "\n", args.out)

    if args.profile_out:
        plines = ["n,z,intensity,phase"]
        for i, z in enumerate(params.target_positions):
            plines.append(
                f"{i + 1},{z},{rec.intensity[i]:.12g},{rec.phase[i]:.12g}"
            )
        _emit("\n".join(plines) + "\n", args.profile_out)

    sys.stderr.write(
        f"optimal_time={rec.optimal_time:.12g} "
        f"infidelity={rec.infidelity:.6e} "
        f"source_population_at_opt={rec.source_population_at_opt:.6e} "
        f"survival_probability={rec.survival_probability:.12g}\n"
    )
    return 0


def _cmd_fit(args) -> int:
    try:
        with open(args.input, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from exc
    if not rows:
        raise UsageError(f"{args.input} has no data rows")
    for col in args.x + [args.y]:
        if col not in rows[0]:
            raise UsageError(f"column {col!r} not in {args.input}")

    def column(name):
        vals = []
        for r in rows:
            cell = r.get(name, "")
            if cell in ("", None):
                vals.append(math.nan)
                continue
            try:
                vals.append(float(cell))
            except ValueError as exc:
                raise UsageError(f"column {name!r} is not numeric: {cell!r}") from exc
        return np.array(vals)

    y = column(args.y)
    xs = [column(name) for name in args.x]
    keep = ~np.isnan(y)
    for c in xs:
        keep &= ~np.isnan(c)
    y = y[keep]
    xs = [c[keep] for c in xs]
    try:
        report = fit_loglog(xs, y, model=args.model, x_names=tuple(args.x))
    except InsufficientDataError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1

    lines = ["quantity,value,stderr",
             f"prefactor,{report.prefactor:.12g},{report.prefactor_stderr:.12g}"]
    for name, expo, err in zip(report.x_names, report.exponents, report.exponent_stderrs):
        lines.append(f"exponent[{name}],{expo:.12g},{err:.12g}")
    lines.append(f"n_used,{report.n_used},")
    lines.append(f"residual_rms,{report.residual_rms:.12g},")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_compare(args) -> int:
    entries = formulas.table1_compare(args.m, args.N, args.p1d, args.xi,
                                      eta=args.eta, x=args.x)
    lines = ["protocol,error_scaling,p_m,requirement,requirement_satisfied"]
    for e in entries:
        lines.append(
            f"{e.protocol},{e.error_scaling:.12g},{e.p_m:.12g},"
            f"\"{e.requirement}\",{e.requirement_satisfied}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "step":
            return _single_point(args, "step")
        if args.command == "accumulate":
            return _single_point(args, "accumulate")
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "bandgap":
            return _cmd_bandgap(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "compare":
            return _cmd_compare(args)
        raise UsageError(f"unknown command {args.command!r}")
    except (UsageError, SweepConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
