"""Command-line front end: single runs, domain sweeps, convergence studies,
barrier verification, randomized corpora, and report summaries.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 solver abort,
3 check-mode assertion failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from vacgas.diagnostics import RunReport
from vacgas.grid import GridError
from vacgas.harness import (
    ConfigError,
    barrier_corpus,
    build_barrier,
    calibrate_coefficients,
    comparison_corpus,
    convergence_study,
    kelvin_coefficients,
    load_config,
    run_domain_sweep,
    run_single,
    scaling_coefficients,
)
from vacgas.hopf import HopfError, HypothesisViolation, OperatorCoefficients, verify_barrier
from vacgas.profiles import ProfileError
from vacgas.solver import SolverAbort

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ABORT = 2
EXIT_CHECK_FAILED = 3


def _check_report(report: RunReport) -> list:
    """Invariant checks applied in --check mode; returns failure messages."""
    failures = []
    e = np.asarray(report.step_energies, dtype=float)
    if e.size >= 2:
        growth = np.diff(e) / np.maximum(np.abs(e[:-1]), 1e-300)
        if float(growth.max()) > 1e-8:
            failures.append(f"energy grew by {float(growth.max()):.3e} in one step")
    if report.j_lower_margin and min(report.j_lower_margin) < -0.05:
        failures.append(f"J lower bound margin {min(report.j_lower_margin):.3f}")
    if report.j_upper_margin and min(report.j_upper_margin) < -0.05:
        failures.append(f"J upper bound margin {min(report.j_upper_margin):.3f}")
    if not report.complete:
        failures.append("run incomplete")
    return failures


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    try:
        report, final, _ = run_single(cfg, level=args.level)
    except SolverAbort as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    print(f"t={report.times[-1]:.6g} energy={report.energy[-1]:.6g} "
          f"sup|s|={report.sup_abs_s[-1]:.6g} "
          f"min J={report.min_j[-1]:.6g} max J={report.max_j[-1]:.6g} "
          f"steps={len(report.step_times)} clamps={report.clamp_count}")
    if args.check:
        failures = _check_report(report)
        for msg in failures:
            print(f"check failed: {msg}", file=sys.stderr)
        if failures:
            return EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    try:
        sweep, reports = run_domain_sweep(cfg)
    except SolverAbort as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    for row in sweep.levels:
        print(f"level {row['level']}: [{row['alpha']:g}, {row['beta']:g}] "
              f"sup|s|={row['sup_abs_s']:.6g} "
              f"inf theta(window)={row['inf_theta_window']:.6g} "
              f"kelvin slope={row['kelvin_slope0']:.6g}")
    for k, d in enumerate(sweep.overlap_rel_diff):
        print(f"overlap {k}->{k + 1}: rel diff {d:.3e}")
    if args.check:
        failures = []
        for report in reports:
            failures.extend(_check_report(report))
        for msg in failures:
            print(f"check failed: {msg}", file=sys.stderr)
        if failures:
            return EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_converge(args) -> int:
    cfg = load_config(args.config)
    try:
        rep = convergence_study(cfg, refinements=args.refinements)
    except SolverAbort as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    print("spatial cells:", rep.spatial_cells)
    print("spatial errors:", [f"{e:.3e}" for e in rep.spatial_errors])
    print("spatial orders:", [f"{o:.3f}" for o in rep.spatial_orders])
    print("temporal dts:", [f"{d:.3e}" for d in rep.temporal_dts])
    print("temporal errors:", [f"{e:.3e}" for e in rep.temporal_errors])
    print("temporal orders:", [f"{o:.3f}" for o in rep.temporal_orders])
    if not rep.spatial_monotone:
        print("warning: spatial error series not monotone", file=sys.stderr)
    if not rep.temporal_monotone:
        print("warning: temporal error series not monotone", file=sys.stderr)
    if args.check:
        ok = (rep.spatial_orders and 1.8 <= rep.spatial_orders[-1] <= 2.4
              and rep.temporal_orders and 0.8 <= rep.temporal_orders[-1] <= 1.4)
        if not ok:
            print("check failed: observed orders out of range", file=sys.stderr)
            return EXIT_CHECK_FAILED
    return EXIT_OK


def _constant_coefficients(args) -> OperatorCoefficients:
    return OperatorCoefficients(
        a0=lambda x, t: np.full(np.shape(x), args.a0),
        a=lambda x, t: np.full(np.shape(x), args.a),
        b=lambda x, t: np.full(np.shape(x), args.b),
        c=lambda x, t: np.full(np.shape(x), args.c),
        lam=args.a, cap_lam=args.a, c_star=args.c_star)


def _snapshot_coefficients(args):
    """Build calibrated operator coefficients from a short simulation run."""
    from vacgas.diagnostics import kelvin_diag, scaling_beta0, scaling_diag

    cfg = load_config(args.config)
    _, final, _ = run_single(cfg, level=args.level, write_outputs=False)
    profile = cfg.density_profile()
    t0 = final.t
    # the barrier hangs off the image of the point at infinity, x = 0, at t0
    y0 = min(0.25, 0.5 * t0)
    geometry = {"p0": (y0, t0), "r": y0, "p_star": (0.0, t0),
                "delta_star": y0 / 8.0}

    if args.preset == "kelvin":
        kd = kelvin_diag(final, cfg.gas, cfg.kelvin_y_fit)
        fns = kelvin_coefficients(final, cfg.gas, profile, kd.n_t)
    else:
        ell = profile.decay_exponent
        if not math.isfinite(ell) or ell <= 2.0:
            raise ConfigError("scaling preset needs an algebraic profile with "
                              "decay exponent above 2")
        sd = scaling_diag(final, cfg.gas, ell)
        fns = scaling_coefficients(final, cfg.gas, profile, sd.beta0, sd.m_t)
    coeffs = calibrate_coefficients(*fns, geometry, seed=args.seed)
    return coeffs, geometry


def _cmd_hopf_verify(args) -> int:
    if args.preset == "constant":
        coeffs = _constant_coefficients(args)
        geometry = {"p0": (1.0, 0.0), "r": 1.0, "p_star": (0.0, 0.0),
                    "delta_star": 0.2}
    else:
        if not args.config:
            print("kelvin/scaling presets need --config", file=sys.stderr)
            return EXIT_INVALID
        coeffs, geometry = _snapshot_coefficients(args)
    spec = build_barrier(coeffs, geometry["p0"], geometry["r"],
                         geometry["p_star"], geometry["delta_star"],
                         zeta_factor=args.zeta_factor)
    try:
        verdict = verify_barrier(coeffs, spec, n_samples=args.samples,
                                 seed=args.seed)
    except HypothesisViolation as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"zeta={spec.zeta:.6g} passed={verdict.passed} "
          f"worst L(phi)={verdict.worst_value:.6g} at {verdict.worst_point}")
    if args.check and not verdict.passed:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_hopf_corpus(args) -> int:
    if args.mode == "barrier":
        verdicts = barrier_corpus(args.count, seed=args.seed,
                                  zeta_factor=args.zeta_factor)
        n_pass = sum(v.passed for v in verdicts)
    else:
        verdicts = comparison_corpus(args.count, seed=args.seed)
        n_pass = sum(v.holds for v in verdicts)
    print(f"{args.mode} corpus: {n_pass}/{len(verdicts)} passed")
    if args.check and n_pass != len(verdicts):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_summarize(args) -> int:
    with open(args.path) as fh:
        report = RunReport.from_dict(json.load(fh))
    print(f"complete={report.complete} config={report.config_hash[:12]}")
    print(f"{'t':>10} {'energy':>12} {'sup|s|':>10} {'inf theta':>12} "
          f"{'min J':>8} {'max J':>8}")
    for i, t in enumerate(report.times):
        print(f"{t:>10.4g} {report.energy[i]:>12.6g} "
              f"{report.sup_abs_s[i]:>10.4g} {report.inf_theta[i]:>12.4g} "
              f"{report.min_j[i]:>8.4g} {report.max_j[i]:>8.4g}")
    if report.warnings:
        print(f"{len(report.warnings)} warning(s); first: {report.warnings[0]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vacgas",
        description="Viscous gas flows with far-field vacuum: simulation and "
                    "degenerate-operator verification tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one domain level")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--level", type=int, default=0)
    p_run.add_argument("--check", action="store_true",
                       help="fail (exit 3) if run invariants are violated")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the expanding-domain sequence")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--check", action="store_true")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_conv = sub.add_parser("converge", help="grid and timestep refinement study")
    p_conv.add_argument("--config", required=True)
    p_conv.add_argument("--refinements", type=int, default=3)
    p_conv.add_argument("--check", action="store_true")
    p_conv.set_defaults(func=_cmd_converge)

    p_hopf = sub.add_parser("hopf", help="degenerate-operator verification")
    hopf_sub = p_hopf.add_subparsers(dest="hopf_command", required=True)

    p_hv = hopf_sub.add_parser("verify", help="single barrier verification")
    p_hv.add_argument("--preset", choices=["constant", "kelvin", "scaling"],
                      default="constant")
    p_hv.add_argument("--config", help="experiment config (kelvin/scaling)")
    p_hv.add_argument("--level", type=int, default=0)
    p_hv.add_argument("--a", type=float, default=1.0)
    p_hv.add_argument("--a0", type=float, default=0.0)
    p_hv.add_argument("--b", type=float, default=0.0)
    p_hv.add_argument("--c", type=float, default=0.0)
    p_hv.add_argument("--c-star", type=float, default=0.0)
    p_hv.add_argument("--zeta-factor", type=float, default=2.0)
    p_hv.add_argument("--samples", type=int, default=2000)
    p_hv.add_argument("--seed", type=int, default=0)
    p_hv.add_argument("--check", action="store_true")
    p_hv.set_defaults(func=_cmd_hopf_verify)

    p_hc = hopf_sub.add_parser("corpus", help="randomized instance corpus")
    p_hc.add_argument("--mode", choices=["barrier", "comparison"],
                      default="barrier")
    p_hc.add_argument("--count", type=int, default=100)
    p_hc.add_argument("--seed", type=int, default=0)
    p_hc.add_argument("--zeta-factor", type=float, default=2.0)
    p_hc.add_argument("--check", action="store_true")
    p_hc.set_defaults(func=_cmd_hopf_corpus)

    p_rep = sub.add_parser("report", help="inspect saved reports")
    rep_sub = p_rep.add_subparsers(dest="report_command", required=True)
    p_rs = rep_sub.add_parser("summarize", help="print a report.json as a table")
    p_rs.add_argument("path")
    p_rs.set_defaults(func=_cmd_summarize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridError, ProfileError, HopfError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
