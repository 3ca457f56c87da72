"""Command-line front end.

Subcommands::

    maci curve        finite-m CP/SEL curves against |gamma|
    maci asymptotic   limiting CP*/SEL* curves
    maci hc-compare   limiting coverage at the two Hjort-Claeskens settings
    maci interval     the interval for a dataset in a problem file
    maci mc-verify    exact values against Monte Carlo estimates

Exit codes: 0 success, 2 usage or parse error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotic import AsymptoticConfig, HC_RHO_VALUES, hc_figure_curves, rho_hc_to_rho_bar, sweep_curve_star
from .errors import DegenerateError, ProblemFileError, QuadratureError
from .exact import ParamPoint, coverage_probability, default_gamma_grid, min_coverage, scaled_expected_length, sweep_curve
from .montecarlo import McSettings, engineered_template, mc_coverage, mc_regression_end_to_end, mc_sel
from .numeric import QuadratureSpec
from .report import OutputBundle, curve_columns, curve_svg, fmt, svg_panels, write_csv
from .testbed import bba_interval, read_problem
from .weights import RHO_CAP, TestbedConfig

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
PASS_SIGMAS = 3.0


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------

def _float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return value


def _correlation(text):
    value = _float(text)
    if abs(value) > RHO_CAP:
        raise argparse.ArgumentTypeError(f"|value| must not exceed {RHO_CAP}, got {text}")
    return value


def _probability(text):
    value = _float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def _positive(text):
    value = _float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _count(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _grid_flags(sub):
    sub.add_argument("--gamma-max", type=_positive, default=10.0)
    sub.add_argument("--gamma-step", type=_positive, default=0.1)
    sub.add_argument("--tol", type=_positive, default=1e-8, help="absolute quadrature tolerance")
    sub.add_argument("--out", type=Path, required=True, help="CSV output path")
    sub.add_argument("--plot", type=Path, help="optional SVG output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maci", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"maci {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("curve", help="finite-m coverage and scaled expected length curves")
    p.add_argument("--m", type=_count, required=True, help="residual degrees of freedom")
    p.add_argument("--p", type=_count, required=True, help="number of regression parameters")
    p.add_argument("--rho", type=_correlation, required=True)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--d", type=_positive, default=2.0, help="GIC penalty (2 = AIC)")
    p.add_argument("--only", choices=("cp", "sel"), help="emit a single column")
    _grid_flags(p)
    p.set_defaults(func=cmd_curve)

    p = subs.add_parser("asymptotic", help="limiting curves as m -> infinity")
    p.add_argument("--rho-bar", type=_correlation, required=True)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--d", type=_positive, default=2.0)
    _grid_flags(p)
    p.set_defaults(func=cmd_asymptotic)

    p = subs.add_parser("hc-compare", help="limiting coverage at rho_hc = 2/3 and 1 (nominal 0.9)")
    _grid_flags(p)
    p.set_defaults(func=cmd_hc_compare)

    p = subs.add_parser("interval", help="compute the interval from a problem file")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--d", type=_positive, default=2.0)
    p.add_argument("--csv", type=Path, help="also write the report as CSV")
    p.set_defaults(func=cmd_interval)

    p = subs.add_parser("mc-verify", help="check exact CP/SEL against Monte Carlo")
    p.add_argument("--m", type=_count, default=10)
    p.add_argument("--p", type=_count, default=3)
    p.add_argument("--rho", type=_correlation, default=0.9)
    p.add_argument("--gamma", type=_float, default=0.0)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--d", type=_positive, default=2.0)
    p.add_argument("--replicates", type=_count, default=1_000_000)
    p.add_argument("--seed", type=_seed, default=McSettings.seed)
    p.add_argument("--full-regression", action="store_true",
                   help="also simulate whole datasets through the regression pipeline")
    p.add_argument("--full-replicates", type=_count, default=100_000)
    p.set_defaults(func=cmd_mc_verify)
    return parser


def _command_line(args, names) -> str:
    parts = ["maci", args.command]
    for name in names:
        value = getattr(args, name.replace("-", "_"))
        if value is None or value is False:
            continue
        parts.append(f"--{name}" if value is True else f"--{name} {value!r}" if isinstance(value, float)
                     else f"--{name} {value}")
    return " ".join(parts)


def _grid(args):
    return default_gamma_grid(args.gamma_max, args.gamma_step)


def _base_metadata(args, names, quad):
    return {
        "command": _command_line(args, names),
        "tool_version": __version__,
        "abs_tol": fmt(quad.abs_tol),
        "inner_half_width": fmt(quad.inner_half_width),
        "outer_prob_tail": fmt(quad.outer_prob_tail),
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_curve(args) -> OutputBundle:
    cfg = TestbedConfig(m=args.m, p=args.p, d=args.d, alpha=args.alpha)
    quad = QuadratureSpec(abs_tol=args.tol)
    table = sweep_curve(args.rho, cfg, _grid(args), quad,
                        cp=args.only != "sel", sel=args.only != "cp",
                        gamma_max=max(10.0, args.gamma_max))
    meta = _base_metadata(args, ["m", "p", "rho", "alpha", "d", "gamma-max", "gamma-step", "tol", "only", "out"], quad)
    meta.update({"m": args.m, "p": args.p, "rho": fmt(args.rho), "alpha": fmt(args.alpha), "d": fmt(args.d),
                 "c_min": fmt(table.c_min), "gamma_at_min": fmt(table.gamma_at_min)})
    write_csv(args.out, curve_columns(table), meta)
    if args.plot:
        title = f"m={args.m}, p={args.p}, |rho|={abs(args.rho):g}, d={args.d:g}"
        Path(args.plot).write_text(curve_svg(table, 1.0 - args.alpha, title), encoding="utf-8")
    return OutputBundle(Path(args.out), args.plot, meta)


def cmd_asymptotic(args) -> OutputBundle:
    acfg = AsymptoticConfig(rho_bar=args.rho_bar, d=args.d, alpha=args.alpha)
    quad = QuadratureSpec(abs_tol=args.tol)
    table = sweep_curve_star(acfg, _grid(args), quad, gamma_max=max(10.0, args.gamma_max))
    meta = _base_metadata(args, ["rho-bar", "alpha", "d", "gamma-max", "gamma-step", "tol", "out"], quad)
    meta.update({"rho_bar": fmt(args.rho_bar), "alpha": fmt(args.alpha), "d": fmt(args.d),
                 "c_min_star": fmt(table.c_min), "gamma_at_min": fmt(table.gamma_at_min)})
    write_csv(args.out, curve_columns(table), meta)
    if args.plot:
        title = f"m -> infinity, |rho_bar|={abs(args.rho_bar):g}, d={args.d:g}"
        Path(args.plot).write_text(curve_svg(table, 1.0 - args.alpha, title), encoding="utf-8")
    return OutputBundle(Path(args.out), args.plot, meta)


def cmd_hc_compare(args) -> OutputBundle:
    quad = QuadratureSpec(abs_tol=args.tol)
    tables = hc_figure_curves(quad, gammas=_grid(args))
    rho_bars = [abs(rho_hc_to_rho_bar(v)) for v in HC_RHO_VALUES]
    meta = _base_metadata(args, ["gamma-max", "gamma-step", "tol", "out"], quad)
    meta.update({"alpha": fmt(0.1), "d": fmt(2.0),
                 "rho_hc": ",".join(fmt(v) for v in HC_RHO_VALUES),
                 "rho_bar": ",".join(fmt(v) for v in rho_bars),
                 "columns": "cp_hc1 is rho_hc=2/3, cp_hc2 is rho_hc=1"})
    cols = {"gamma": tables[0].gammas, "cp_hc1": tables[0].cp, "cp_hc2": tables[1].cp}
    write_csv(args.out, cols, meta)
    if args.plot:
        series = [(f"|rho_bar| = {rb:.4f} (rho_hc = {label})", t.cp)
                  for rb, label, t in zip(rho_bars, ("2/3", "1"), tables)]
        svg = svg_panels(tables[0].gammas, [{"series": series, "ylabel": "coverage probability",
                                             "title": "m -> infinity, nominal 0.9, d=2", "ref": 0.9}])
        Path(args.plot).write_text(svg, encoding="utf-8")
    return OutputBundle(Path(args.out), args.plot, meta)


INTERVAL_FIELDS = ("theta_hat", "theta_hat_1", "gamma_hat", "w1_value", "sigma_hat",
                   "theta_tilde", "se", "lower", "upper")


def cmd_interval(args):
    problem = read_problem(args.data)
    cfg = TestbedConfig(m=problem.m, p=problem.p, d=args.d, alpha=args.alpha)
    res = bba_interval(problem, cfg)
    lines = [f"n = {problem.n}, p = {problem.p}, m = {problem.m}, alpha = {fmt(args.alpha)}, d = {fmt(args.d)}",
             f"v_theta = {fmt(res.scalars.v_theta)}, v_tau = {fmt(res.scalars.v_tau)}, rho = {fmt(res.scalars.rho)}"]
    lines += [f"{name} = {fmt(getattr(res, name))}" for name in INTERVAL_FIELDS]
    lines.append(f"interval = [{fmt(res.lower)}, {fmt(res.upper)}]")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.csv:
        write_csv(args.csv, {name: [getattr(res, name)] for name in INTERVAL_FIELDS},
                  {"data": str(args.data), "alpha": fmt(args.alpha), "d": fmt(args.d)})
    return report


def cmd_mc_verify(args):
    cfg = TestbedConfig(m=args.m, p=args.p, d=args.d, alpha=args.alpha)
    point = ParamPoint(args.gamma, args.rho)
    settings = McSettings(replicates=args.replicates, seed=args.seed)
    c_min = min_coverage(args.rho, cfg).c_min
    cp = coverage_probability(point, cfg)
    sel = scaled_expected_length(point, cfg, c_min)
    mc_cp = mc_coverage(point, cfg, settings)
    mc_s = mc_sel(point, cfg, c_min, settings)
    checks = [("cp", cp, mc_cp.estimate, mc_cp.std_err), ("sel", sel, mc_s.estimate, mc_s.std_err)]
    lines = [f"m = {args.m}, p = {args.p}, d = {fmt(args.d)}, alpha = {fmt(args.alpha)}, "
             f"gamma = {fmt(args.gamma)}, rho = {fmt(args.rho)}",
             f"replicates = {args.replicates}, seed = {args.seed}",
             f"c_min = {fmt(c_min)}"]
    if args.full_regression:
        template = engineered_template(args.m, args.p, args.rho)
        e2e = mc_regression_end_to_end(template, 0.0, args.gamma, cfg,
                                       McSettings(replicates=args.full_replicates, seed=args.seed))
        checks.append(("cp_full_regression", cp, e2e.coverage, e2e.coverage_se))
        lines.append(f"full_regression_replicates = {args.full_replicates}, "
                     f"full_regression_mean_length = {fmt(e2e.mean_length)}")
    ok = True
    for name, exact, est, se in checks:
        z = (est - exact) / se
        passed = abs(z) <= PASS_SIGMAS
        ok &= passed
        lines.append(f"{name}: exact = {fmt(exact)}, mc = {fmt(est)}, std_err = {fmt(se)}, "
                     f"z = {z:+.3f}  {'PASS' if passed else 'FAIL'}")
    lines.append("PASS" if ok else "FAIL")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    return ok


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    if args.command in ("curve", "asymptotic", "hc-compare") and args.gamma_step > args.gamma_max:
        parser.error("--gamma-step must not exceed --gamma-max")
    if args.command == "mc-verify" and args.full_regression and args.p < 2:
        parser.error("--full-regression needs --p >= 2")
    try:
        result = args.func(args)
    except (ProblemFileError, OSError) as exc:
        print(f"maci {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateError, QuadratureError) as exc:
        print(f"maci {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"maci {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "mc-verify" and not result:
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
