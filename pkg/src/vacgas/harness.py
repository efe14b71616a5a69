"""Experiment orchestration: TOML configs, single runs on one domain level,
expanding-domain sweeps, grid/timestep convergence studies, randomized operator
corpora, and atomic report output (JSON plus CSV series)."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from vacgas.diagnostics import (
    ConservedQuantities,
    DiagnosticsError,
    RunReport,
    conserved_quantities,
    band_probes,
    default_probes,
    default_theta_floor,
    energy_functional,
    entropy_field,
    entropy_ratio_probe,
    farfield_growth_check,
    j_bounds,
    kelvin_diag,
    monitored_norms,
)
from vacgas.grid import DomainSequence, Grid, Stretching, build_grid, domain_sequence
from vacgas.hopf import (
    BarrierSpec,
    OperatorCoefficients,
    comparison_check,
    sample_lens,
    verify_barrier,
    zeta0,
)
from vacgas.profiles import (
    GasConstants,
    default_initial_fields,
    make_density_profile,
    truncate_and_extend,
)
from vacgas.solver import (
    SimState,
    SolverAbort,
    SolverConfig,
    make_state,
    run,
    step,
    velocity_gradient,
)


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def _section(raw: dict, name: str) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(sec)


def _take(sec: dict, name: str, key: str, default, kind):
    if key not in sec:
        return default
    val = sec.pop(key)
    try:
        if kind is float and isinstance(val, bool):
            raise TypeError
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}.{key}: cannot interpret {val!r}") from None


def _reject_unknown(sec: dict, name: str):
    if sec:
        raise ConfigError(f"unknown key(s) in [{name}]: {sorted(sec)}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment parameters plus a hash of the raw TOML dict."""

    profile_family: str
    profile_params: tuple
    v_amp: float
    t_amp: float
    gas: GasConstants
    n_cells: int
    cells_growth: float
    stretching: Stretching
    sinh_scale: float
    domains: DomainSequence
    t_end: float
    dt_init: float
    dt_max: float
    cfl_factor: float
    picard_iters: int
    snapshot_times: tuple
    probe_fraction: float
    probe_band: tuple
    window_half_width: float
    kelvin_y_fit: float
    theta_floor: float  # 0 means derive from the initial data
    output_dir: str
    seed: int
    config_hash: str

    def density_profile(self):
        return make_density_profile(self.profile_family, self.profile_params)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(dt_init=self.dt_init, dt_max=self.dt_max,
                            cfl_factor=self.cfl_factor,
                            picard_iters=self.picard_iters,
                            snapshot_times=self.snapshot_times, gas=self.gas)


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a configuration mapping; unknown keys are hard errors."""
    raw = dict(raw)
    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, default=str).encode()).hexdigest()

    top = dict(raw)
    seed = _take(top, "top level", "seed", 0, int)

    profile = _section(top, "profile")
    top.pop("profile", None)
    family = _take(profile, "profile", "family", "Algebraic", str)
    params = profile.pop("params", [1.0, 4.0])
    if not isinstance(params, (list, tuple)):
        raise ConfigError("profile.params must be a list")
    _reject_unknown(profile, "profile")

    fields_sec = _section(top, "fields")
    top.pop("fields", None)
    v_amp = _take(fields_sec, "fields", "v_amp", 1.0, float)
    t_amp = _take(fields_sec, "fields", "t_amp", 1.0, float)
    _reject_unknown(fields_sec, "fields")

    gas_sec = _section(top, "gas")
    top.pop("gas", None)
    gas = GasConstants(
        mu=_take(gas_sec, "gas", "mu", 1.0, float),
        kappa=_take(gas_sec, "gas", "kappa", 1.0, float),
        r_gas=_take(gas_sec, "gas", "r_gas", 1.0, float),
        c_v=_take(gas_sec, "gas", "c_v", 1.0, float),
        a_entropy=_take(gas_sec, "gas", "a_entropy", 1.0, float),
    )
    _reject_unknown(gas_sec, "gas")

    grid_sec = _section(top, "grid")
    top.pop("grid", None)
    n_cells = _take(grid_sec, "grid", "n_cells", 512, int)
    cells_growth = _take(grid_sec, "grid", "cells_growth", 1.0, float)
    stretching_name = _take(grid_sec, "grid", "stretching", "Sinh", str)
    sinh_scale = _take(grid_sec, "grid", "sinh_scale", 3.0, float)
    _reject_unknown(grid_sec, "grid")
    try:
        stretching = Stretching(stretching_name)
    except ValueError:
        raise ConfigError(f"grid.stretching: unknown value {stretching_name!r}") from None
    if cells_growth < 1.0:
        raise ConfigError("grid.cells_growth must be >= 1")

    dom_sec = _section(top, "domain")
    top.pop("domain", None)
    domains = DomainSequence(
        base_half_width=_take(dom_sec, "domain", "base_half_width", 40.0, float),
        growth=_take(dom_sec, "domain", "growth", 2.0, float),
        n_levels=_take(dom_sec, "domain", "n_levels", 1, int),
    )
    _reject_unknown(dom_sec, "domain")

    sol_sec = _section(top, "solver")
    top.pop("solver", None)
    t_end = _take(sol_sec, "solver", "t_end", 0.5, float)
    dt_init = _take(sol_sec, "solver", "dt_init", 1e-4, float)
    dt_max = _take(sol_sec, "solver", "dt_max", 5e-4, float)
    cfl_factor = _take(sol_sec, "solver", "cfl_factor", 0.5, float)
    picard_iters = _take(sol_sec, "solver", "picard_iters", 2, int)
    snaps = sol_sec.pop("snapshot_times", [])
    if not isinstance(snaps, (list, tuple)):
        raise ConfigError("solver.snapshot_times must be a list")
    _reject_unknown(sol_sec, "solver")
    if t_end <= 0:
        raise ConfigError("solver.t_end must be positive")

    diag_sec = _section(top, "diagnostics")
    top.pop("diagnostics", None)
    probe_fraction = _take(diag_sec, "diagnostics", "probe_fraction", 0.05, float)
    probe_band = diag_sec.pop("probe_band", [])
    if not isinstance(probe_band, (list, tuple)) or len(probe_band) not in (0, 2):
        raise ConfigError("diagnostics.probe_band must be a [lo, hi] pair")
    window_half_width = _take(diag_sec, "diagnostics", "window_half_width", 1.0, float)
    kelvin_y_fit = _take(diag_sec, "diagnostics", "kelvin_y_fit", 0.1, float)
    theta_floor = _take(diag_sec, "diagnostics", "theta_floor", 0.0, float)
    _reject_unknown(diag_sec, "diagnostics")

    out_sec = _section(top, "output")
    top.pop("output", None)
    output_dir = _take(out_sec, "output", "directory", "", str)
    _reject_unknown(out_sec, "output")

    _reject_unknown(top, "top level")

    cfg = ExperimentConfig(
        profile_family=family,
        profile_params=tuple(float(p) for p in params),
        v_amp=v_amp, t_amp=t_amp, gas=gas,
        n_cells=n_cells, cells_growth=cells_growth,
        stretching=stretching, sinh_scale=sinh_scale,
        domains=domains,
        t_end=t_end, dt_init=dt_init, dt_max=dt_max,
        cfl_factor=cfl_factor, picard_iters=picard_iters,
        snapshot_times=tuple(float(t) for t in snaps),
        probe_fraction=probe_fraction,
        probe_band=tuple(float(p) for p in probe_band),
        window_half_width=window_half_width,
        kelvin_y_fit=kelvin_y_fit,
        theta_floor=theta_floor,
        output_dir=output_dir,
        seed=seed,
        config_hash=digest,
    )
    try:
        cfg.density_profile()
        cfg.solver_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw)


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    _atomic_write(path, buf.getvalue())


def level_cells(cfg: ExperimentConfig, level: int) -> int:
    return int(round(cfg.n_cells * cfg.cells_growth ** level))


def build_level_state(cfg: ExperimentConfig, level: int = 0,
                      n_cells: int = None,
                      stretching: Stretching = None) -> tuple[Grid, SimState]:
    """Grid and initial state for one domain level.

    Initial data live on [alpha_n, beta_n] and are extended to the computational
    interval [alpha_n - 1, beta_n + 1] with matched boundary conditions.
    """
    prof = cfg.density_profile()
    alpha_n, beta_n = domain_sequence(cfg.domains, level)
    base = default_initial_fields(cfg.v_amp, cfg.t_amp, prof, cfg.gas)
    ext = truncate_and_extend(base, alpha_n, beta_n)
    grid = build_grid(alpha_n - 1.0, beta_n + 1.0,
                      n_cells if n_cells is not None else level_cells(cfg, level),
                      stretching if stretching is not None else cfg.stretching,
                      cfg.sinh_scale)
    y = grid.nodes
    state = make_state(grid, prof.rho0(y), ext.v0(y), ext.theta0(y))
    return grid, state


def resolve_theta_floor(cfg: ExperimentConfig, state0: SimState,
                        cons: ConservedQuantities) -> float:
    if cfg.theta_floor > 0:
        return cfg.theta_floor
    kinetic_scale = cons.e0 / (cfg.gas.c_v * cons.m0) if cons.m0 > 0 else 0.0
    return default_theta_floor(float(state0.theta.max()), kinetic_scale)


def _append_snapshot(report: RunReport, state: SimState, cfg: ExperimentConfig,
                     cons: ConservedQuantities, theta_floor: float, probes):
    gas = cfg.gas
    report.times.append(float(state.t))
    report.energy.append(energy_functional(state, gas))

    ent = entropy_field(state, gas, theta_floor)
    report.sup_abs_s.append(ent.sup_abs())
    theta_in = state.theta[1:-1]
    report.inf_theta.append(float(theta_in.min()) if theta_in.size else 0.0)
    window = np.abs(state.grid.nodes) <= cfg.window_half_width
    report.inf_theta_window.append(
        float(state.theta[window].min()) if np.any(window) else float("nan"))

    lower, upper = j_bounds(state, cons, gas)
    report.min_j.append(float(state.J.min()))
    report.max_j.append(float(state.J.max()))
    report.j_lower_margin.append(float((state.J.min() - lower) / lower))
    report.j_upper_margin.append(float(np.min((upper - state.J) / upper)))

    ratios, warns = entropy_ratio_probe(state, ent, probes)
    report.entropy_ratios.append(ratios)
    report.warnings.extend(f"t={state.t:.6g}: {w}" for w in warns)

    try:
        kd = kelvin_diag(state, gas, cfg.kelvin_y_fit)
        report.kelvin_slope0.append(kd.slope0)
        report.kelvin_n_t.append(kd.n_t)
    except DiagnosticsError as exc:
        report.kelvin_slope0.append(float("nan"))
        report.kelvin_n_t.append(float("nan"))
        report.warnings.append(f"t={state.t:.6g}: kelvin fit skipped ({exc})")

    report.farfield_violation.append(farfield_growth_check(state).violation_ratio)
    report.monitored_norms.append(monitored_norms(state, gas))


def _write_run_outputs(out_dir: Path, report: RunReport, state: SimState,
                       snaps):
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "report.json",
                  json.dumps(report.to_dict(), indent=1))
    _write_csv(out_dir / "steps.csv", ["t", "energy"],
               zip(report.step_times, report.step_energies))
    _write_csv(out_dir / "series.csv",
               ["t", "energy", "sup_abs_s", "inf_theta", "inf_theta_window",
                "min_j", "max_j", "j_lower_margin", "j_upper_margin",
                "kelvin_slope0", "farfield_violation"],
               zip(report.times, report.energy, report.sup_abs_s,
                   report.inf_theta, report.inf_theta_window, report.min_j,
                   report.max_j, report.j_lower_margin, report.j_upper_margin,
                   report.kelvin_slope0, report.farfield_violation))
    for t, snap in snaps + [(state.t, state)]:
        name = f"snapshot_t{t:.6g}.csv"
        _write_csv(out_dir / name, ["y", "J", "v", "theta"],
                   zip(snap.grid.nodes, snap.J, snap.v, snap.theta))


def run_single(cfg: ExperimentConfig, level: int = 0, n_cells: int = None,
               write_outputs: bool = None):
    """Integrate one level to t_end and collect the diagnostic report.

    Returns (report, final state, snapshots). On solver abort the partial
    report is flushed with complete=False before the abort is re-raised.
    """
    grid, state0 = build_level_state(cfg, level, n_cells)
    cons = conserved_quantities(state0, cfg.gas)
    theta_floor = resolve_theta_floor(cfg, state0, cons)
    if cfg.probe_band:
        probes = band_probes(state0, *cfg.probe_band)
    else:
        probes = default_probes(state0, cfg.probe_fraction)

    report = RunReport(config_hash=cfg.config_hash,
                       j_lower_bound=j_bounds(state0, cons, cfg.gas)[0])
    _append_snapshot(report, state0, cfg, cons, theta_floor, probes)

    if write_outputs is None:
        write_outputs = bool(cfg.output_dir)
    out_dir = Path(cfg.output_dir) / f"level{level}" if cfg.output_dir else None

    scfg = cfg.solver_config()
    try:
        final, snaps, log = run(state0, cfg.t_end, scfg)
    except SolverAbort as exc:
        report.complete = False
        report.warnings.append(f"solver abort: {exc}")
        if exc.log is not None:
            report.step_times = list(exc.log.times)
            report.step_energies = list(exc.log.energies)
        if exc.state is not None:
            _append_snapshot(report, exc.state, cfg, cons, theta_floor, probes)
            report.clamp_mass = float(exc.state.clamp_mass)
            report.clamp_count = int(exc.state.clamp_count)
        if write_outputs and out_dir is not None:
            last = exc.state if exc.state is not None else state0
            _write_run_outputs(out_dir, report, last, [])
        raise

    for _, snap in snaps:
        _append_snapshot(report, snap, cfg, cons, theta_floor, probes)
    _append_snapshot(report, final, cfg, cons, theta_floor, probes)
    report.step_times = list(log.times)
    report.step_energies = list(log.energies)
    report.clamp_mass = float(final.clamp_mass)
    report.clamp_count = int(final.clamp_count)

    if write_outputs and out_dir is not None:
        _write_run_outputs(out_dir, report, final, snaps)
    return report, final, snaps


@dataclass
class SweepReport:
    """Per-level diagnostics of an expanding-domain sweep plus cross-level
    comparisons of the final temperature on the shared core."""

    levels: list = field(default_factory=list)
    overlap_rel_diff: list = field(default_factory=list)
    sup_abs_s_final: list = field(default_factory=list)
    inf_theta_window_final: list = field(default_factory=list)
    kelvin_slope0_final: list = field(default_factory=list)
    config_hash: str = ""
    complete: bool = True

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "complete": self.complete,
            "levels": self.levels,
            "overlap_rel_diff": self.overlap_rel_diff,
            "sup_abs_s_final": self.sup_abs_s_final,
            "inf_theta_window_final": self.inf_theta_window_final,
            "kelvin_slope0_final": self.kelvin_slope0_final,
        }


def run_domain_sweep(cfg: ExperimentConfig):
    """Run every domain level and compare consecutive levels on the overlap.

    Returns (SweepReport, list of RunReport). The overlap comparison
    interpolates the final temperatures of consecutive levels onto the smaller
    domain and reports the max pointwise difference relative to the sup of the
    finer-level temperature there.
    """
    sweep = SweepReport(config_hash=cfg.config_hash)
    reports = []
    finals = []
    for level in range(cfg.domains.n_levels):
        alpha_n, beta_n = domain_sequence(cfg.domains, level)
        report, final, _ = run_single(cfg, level)
        reports.append(report)
        finals.append(final)
        sweep.levels.append({
            "level": level,
            "alpha": alpha_n,
            "beta": beta_n,
            "n_cells": level_cells(cfg, level),
            "sup_abs_s": report.sup_abs_s[-1],
            "inf_theta": report.inf_theta[-1],
            "inf_theta_window": report.inf_theta_window[-1],
            "kelvin_slope0": report.kelvin_slope0[-1],
            "entropy_ratios": report.entropy_ratios[-1],
            "min_j": report.min_j[-1],
            "max_j": report.max_j[-1],
        })
        sweep.sup_abs_s_final.append(report.sup_abs_s[-1])
        sweep.inf_theta_window_final.append(report.inf_theta_window[-1])
        sweep.kelvin_slope0_final.append(report.kelvin_slope0[-1])

    for small, big in zip(finals[:-1], finals[1:]):
        beta_n = small.grid.beta - 1.0
        ys = np.linspace(-beta_n, beta_n, 512)
        th_small = np.interp(ys, small.grid.nodes, small.theta)
        th_big = np.interp(ys, big.grid.nodes, big.theta)
        scale = max(float(np.max(np.abs(th_big))), 1e-300)
        sweep.overlap_rel_diff.append(
            float(np.max(np.abs(th_small - th_big)) / scale))

    if cfg.output_dir:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _atomic_write(out / "sweep.json", json.dumps(sweep.to_dict(), indent=1))
    return sweep, reports


def run_fixed_dt(state: SimState, t_end: float, dt: float,
                 scfg: SolverConfig) -> SimState:
    """Constant-step integration used by the convergence studies."""
    while state.t < t_end - 1e-12 * t_end:
        state = step(state, scfg, min(dt, t_end - state.t))
    return replace(state, t=t_end)


@dataclass
class ConvergenceReport:
    spatial_cells: list = field(default_factory=list)
    spatial_errors: list = field(default_factory=list)
    spatial_orders: list = field(default_factory=list)
    temporal_dts: list = field(default_factory=list)
    temporal_errors: list = field(default_factory=list)
    temporal_orders: list = field(default_factory=list)
    spatial_monotone: bool = True
    temporal_monotone: bool = True
    config_hash: str = ""

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("config_hash", "spatial_cells", "spatial_errors",
                 "spatial_orders", "spatial_monotone", "temporal_dts",
                 "temporal_errors", "temporal_orders", "temporal_monotone")}


def _l2_error(grid: Grid, u, u_ref) -> float:
    w = grid.node_weights()
    return math.sqrt(float(np.sum(w * (u - u_ref) ** 2)))


def _orders(errors):
    orders = []
    monotone = True
    for e0, e1 in zip(errors[:-1], errors[1:]):
        if e1 >= e0:
            monotone = False
        if e0 > 0 and e1 > 0:
            orders.append(math.log2(e0 / e1))
        else:
            orders.append(float("nan"))
    return orders, monotone


def convergence_study(cfg: ExperimentConfig, refinements: int = 3):
    """Self-convergence of theta at t_end under grid and timestep refinement.

    The spatial study uses nested uniform grids n, 2n, ..., comparing each
    level against the next at a fixed timestep; the temporal study fixes the
    grid and compares consecutive timestep halvings. Orders are log2 ratios of
    consecutive self-convergence errors.
    """
    if refinements < 3:
        raise ConfigError("need at least 3 refinements")
    rep = ConvergenceReport(config_hash=cfg.config_hash)
    scfg = cfg.solver_config()
    dt0 = cfg.dt_max

    cells = [cfg.n_cells * 2 ** k for k in range(refinements + 1)]
    states = []
    for n in cells:
        _, s0 = build_level_state(cfg, 0, n_cells=n, stretching=Stretching.UNIFORM)
        states.append(run_fixed_dt(s0, cfg.t_end, dt0, scfg))
    errors = [_l2_error(coarse.grid, coarse.theta, fine.theta[::2])
              for coarse, fine in zip(states[:-1], states[1:])]
    rep.spatial_cells = cells[:-1]
    rep.spatial_errors = errors
    rep.spatial_orders, rep.spatial_monotone = _orders(errors)

    _, s0 = build_level_state(cfg, 0, stretching=Stretching.UNIFORM)
    dts = [dt0 / 2 ** k for k in range(refinements + 1)]
    finals = [run_fixed_dt(s0, cfg.t_end, dt, scfg) for dt in dts]
    errors_t = [_l2_error(a.grid, a.theta, b.theta)
                for a, b in zip(finals[:-1], finals[1:])]
    rep.temporal_dts = dts[:-1]
    rep.temporal_errors = errors_t
    rep.temporal_orders, rep.temporal_monotone = _orders(errors_t)

    if cfg.output_dir:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _atomic_write(out / "convergence.json", json.dumps(rep.to_dict(), indent=1))
    return rep


def _interp_fn(nodes, values):
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)

    def fn(y):
        return np.interp(np.asarray(y, dtype=float), nodes, values)

    return fn


def kelvin_coefficients(state: SimState, gas: GasConstants, profile,
                        n_t: float):
    """Operator coefficients of the damped inverted-coordinate temperature
    equation near the point at infinity, frozen at one snapshot.

    In the inverted coordinate y the field is H = exp(-n_t * t) * y * theta(1/y),
    and the operator reads -a H_xx + a0 H_t + b H_x + c H with

        a0 = c_v * rho0(1/y) / y^4
        a  = kappa / J(1/y)
        b  = -kappa * J_y(1/y) / (J^2 * y^2)
        c  = rho0(1/y)/y^4 * (R*v_y(1/y)/J ... ) + n_t * a0  (zero order, >= 0
             wherever the damping dominates).

    Returns plain coefficient callables of (x, t); admissibility constants are
    left to `calibrate_coefficients` on a concrete lens.
    """
    J = _interp_fn(state.grid.nodes, state.J)
    jy = np.gradient(state.J, state.grid.nodes, edge_order=2)
    Jy = _interp_fn(state.grid.nodes, jy)
    vy = velocity_gradient(state.grid, state.v)
    Vy = _interp_fn(state.grid.nodes, vy)

    def a0(x, t):
        x = np.asarray(x, dtype=float)
        return gas.c_v * profile.rho0(1.0 / x) / x ** 4

    def a(x, t):
        return gas.kappa / J(1.0 / np.asarray(x, dtype=float))

    def b(x, t):
        x = np.asarray(x, dtype=float)
        inv = 1.0 / x
        return -gas.kappa * Jy(inv) / (J(inv) ** 2 * x * x)

    def c(x, t):
        x = np.asarray(x, dtype=float)
        inv = 1.0 / x
        tilde = profile.rho0(inv) / x ** 4 * gas.r_gas * Vy(inv) / J(inv)
        return tilde + n_t * gas.c_v * profile.rho0(inv) / x ** 4

    return a0, a, b, c


def scaling_coefficients(state: SimState, gas: GasConstants, profile,
                         beta: float, m_t: float):
    """Operator coefficients of the stretched-coordinate temperature equation
    f(x, t) = theta(x^(-beta), t), frozen at one snapshot:

        a0 = c_v * rho0(x^-beta) * x^-(2+2beta) * J
        a  = kappa / beta^2
        b  = -(kappa*(beta+1)/beta^2 / x + kappa/beta * x^-(1+beta) * J_y/J)
        c  = rho0(x^-beta) * x^-(2+2beta) * (c_v*m_t*J + R*v_y)
    """
    J = _interp_fn(state.grid.nodes, state.J)
    jy = np.gradient(state.J, state.grid.nodes, edge_order=2)
    Jy = _interp_fn(state.grid.nodes, jy)
    vy = velocity_gradient(state.grid, state.v)
    Vy = _interp_fn(state.grid.nodes, vy)
    kb2 = gas.kappa / beta ** 2

    def a0(x, t):
        x = np.asarray(x, dtype=float)
        inv = x ** (-beta)
        return gas.c_v * profile.rho0(inv) * x ** (-2.0 - 2.0 * beta) * J(inv)

    def a(x, t):
        return np.full(np.shape(np.asarray(x, dtype=float)), kb2)

    def b(x, t):
        x = np.asarray(x, dtype=float)
        inv = x ** (-beta)
        return -(kb2 * (beta + 1.0) / x
                 + gas.kappa / beta * x ** (-1.0 - beta) * Jy(inv) / J(inv))

    def c(x, t):
        x = np.asarray(x, dtype=float)
        inv = x ** (-beta)
        return (profile.rho0(inv) * x ** (-2.0 - 2.0 * beta)
                * (gas.c_v * m_t * J(inv) + gas.r_gas * Vy(inv)))

    return a0, a, b, c


def calibrate_coefficients(a0, a, b, c, spec_geometry: dict,
                           n_samples: int = 2000,
                           seed: int = 0) -> OperatorCoefficients:
    """Measure admissibility constants of coefficient callables over the lens
    of a barrier geometry (p0, r, p_star, delta_star keys) and wrap them.

    lam/cap_lam come from the sampled range of a; c_star covers both the drift
    lower bound and the zero-order bound with a small safety factor.
    """
    probe = BarrierSpec(p0=spec_geometry["p0"], r=spec_geometry["r"],
                        p_star=spec_geometry["p_star"],
                        delta_star=spec_geometry["delta_star"], zeta=1.0)
    pts = sample_lens(probe, n_samples, seed=seed)
    x, t = pts[:, 0], pts[:, 1]
    av = np.broadcast_to(np.asarray(a(x, t), dtype=float), x.shape)
    a0v = np.broadcast_to(np.asarray(a0(x, t), dtype=float), x.shape)
    bv = np.broadcast_to(np.asarray(b(x, t), dtype=float), x.shape)
    cv = np.broadcast_to(np.asarray(c(x, t), dtype=float), x.shape)
    if np.any(av <= 0):
        raise ConfigError("spatial ellipticity fails on the lens")
    if np.any(cv < 0):
        raise ConfigError("zero-order coefficient is negative on the lens")
    xc, tc = probe.p0_star
    xs, ts = probe.p_star
    drift = (t - tc) * a0v + (x - xc) * bv
    cdist = cv * np.sqrt((x - xs) ** 2 + (t - ts) ** 2)
    c_star = max(max(0.0, -float(drift.min())), float(cdist.max())) * (1.0 + 1e-9)
    return OperatorCoefficients(a0=a0, a=a, b=b, c=c,
                                lam=float(av.min()) * (1.0 - 1e-9),
                                cap_lam=float(av.max()) * (1.0 + 1e-9),
                                c_star=c_star)


def build_barrier(coeffs: OperatorCoefficients, p0, r, p_star, delta_star,
                  zeta_factor: float = 2.0) -> BarrierSpec:
    """Barrier with sharpness zeta_factor times the threshold value."""
    dist = abs(p0[0] - p_star[0])
    z0 = zeta0(1, coeffs.lam, coeffs.cap_lam, coeffs.c_star, r, dist)
    return BarrierSpec(p0=tuple(p0), r=r, p_star=tuple(p_star),
                       delta_star=delta_star, zeta=zeta_factor * z0)


def barrier_corpus(n_draws: int, seed: int = 0, zeta_factor: float = 2.0):
    """Randomized constant-coefficient barrier instances.

    Each draw picks admissible constants and a geometry with the small ball
    touching the big ball at p_star; coefficients are sized so the hypothesis
    inequalities hold on the whole lens. Returns the list of verdicts.
    """
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n_draws):
        lam = float(rng.uniform(0.2, 2.0))
        cap = lam * float(rng.uniform(1.0, 3.0))
        a_val = float(rng.uniform(lam, cap))
        r = float(rng.uniform(0.5, 2.0))
        # direction with a genuine spatial component
        ang = float(rng.uniform(-1.2, 1.2))
        sgn = 1.0 if rng.random() < 0.5 else -1.0
        xs = sgn * r * math.cos(ang)
        ts = r * math.sin(ang)
        dist = abs(xs)
        delta = float(rng.uniform(0.05, 0.9)) * dist / 4.0
        c_star = float(rng.uniform(0.0, 2.0))
        # lens points stay within r/2 of the midpoint, so these amplitudes
        # keep the drift bound; the zero-order bound uses the lens radius
        amp = 0.9 * c_star / r
        a0_val = float(rng.uniform(-amp, amp))
        b_val = float(rng.uniform(-amp, amp))
        c_val = 0.9 * c_star / delta if delta > 0 else 0.0
        c_val = float(rng.uniform(0.0, c_val))

        coeffs = OperatorCoefficients(
            a0=lambda x, t, v=a0_val: np.full(np.shape(x), v),
            a=lambda x, t, v=a_val: np.full(np.shape(x), v),
            b=lambda x, t, v=b_val: np.full(np.shape(x), v),
            c=lambda x, t, v=c_val: np.full(np.shape(x), v),
            lam=lam, cap_lam=cap, c_star=c_star)
        spec = build_barrier(coeffs, (0.0, 0.0), r, (xs, ts), delta,
                             zeta_factor=zeta_factor)
        verdict = verify_barrier(coeffs, spec, n_samples=1000,
                                 seed=seed + 1000 + k)
        out.append(verdict)
    return out


def comparison_corpus(n_instances: int, seed: int = 0, n_grid: int = 20):
    """Randomized minimum-principle instances on small uniform rectangles.

    Each instance draws admissible coefficients with c bounded away from zero
    and a random smooth field, then shifts the field by a constant so that
    L(phi) > 0 in the interior and phi >= 0 on the boundary. Returns the list
    of ComparisonResult verdicts (all of which should hold).
    """
    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, 1.0, n_grid)
    ts = np.linspace(0.0, 1.0, n_grid)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    out = []
    for _ in range(n_instances):
        a_val = float(rng.uniform(0.2, 2.0))
        a0_val = float(rng.uniform(-1.0, 1.0))
        b_val = float(rng.uniform(-1.0, 1.0))
        c_val = float(rng.uniform(0.1, 2.0))
        coeffs = OperatorCoefficients(
            a0=lambda x, t, v=a0_val: np.full(np.shape(x), v),
            a=lambda x, t, v=a_val: np.full(np.shape(x), v),
            b=lambda x, t, v=b_val: np.full(np.shape(x), v),
            c=lambda x, t, v=c_val: np.full(np.shape(x), v),
            lam=a_val, cap_lam=a_val, c_star=1.0)

        phi = np.zeros_like(X)
        for _ in range(3):
            kx = float(rng.uniform(0.5, 3.0))
            kt = float(rng.uniform(0.5, 3.0))
            px = float(rng.uniform(0.0, 2.0 * math.pi))
            pt = float(rng.uniform(0.0, 2.0 * math.pi))
            phi += float(rng.uniform(-1.0, 1.0)) * np.sin(kx * X + px) * np.sin(kt * T + pt)

        hx = xs[1] - xs[0]
        ht = ts[1] - ts[0]
        phi_xx = (phi[2:, 1:-1] - 2 * phi[1:-1, 1:-1] + phi[:-2, 1:-1]) / hx ** 2
        phi_x = (phi[2:, 1:-1] - phi[:-2, 1:-1]) / (2 * hx)
        phi_t = (phi[1:-1, 2:] - phi[1:-1, :-2]) / (2 * ht)
        lphi = (-a_val * phi_xx + a0_val * phi_t + b_val * phi_x
                + c_val * phi[1:-1, 1:-1])
        # shifting phi by a constant shifts L(phi) by c*shift; pick the shift
        # so both premises of the principle hold with margin
        shift = max(0.0, -float(lphi.min()) / c_val, -float(phi.min()))
        shift += float(rng.uniform(0.1, 1.0))
        out.append(comparison_check(coeffs, xs, ts, phi + shift))
    return out
