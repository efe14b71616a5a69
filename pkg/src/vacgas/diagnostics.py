"""Derived quantities of a simulation state: entropy, energy, conserved
integrals, explicit Jacobian bounds, far-field transforms, and regime probes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from vacgas.profiles import GasConstants
from vacgas.solver import SimState, velocity_gradient, compute_G


class DiagnosticsError(RuntimeError):
    """A diagnostic could not be evaluated on this state."""


@dataclass(frozen=True)
class ConservedQuantities:
    """Initial mass and energy integrals, frozen at t = 0."""

    m0: float
    e0: float


def conserved_quantities(state: SimState, gas: GasConstants) -> ConservedQuantities:
    w = state.grid.node_weights()
    m0 = float(np.sum(w * state.rho0))
    e0 = float(np.sum(w * state.rho0 * (0.5 * state.v ** 2 + gas.c_v * state.theta)))
    return ConservedQuantities(m0=m0, e0=e0)


def energy_functional(state: SimState, gas: GasConstants) -> float:
    """Trapezoid quadrature of rho0*(v^2/2 + c_v*theta)."""
    w = state.grid.node_weights()
    return float(np.sum(w * state.rho0 * (0.5 * state.v ** 2 + gas.c_v * state.theta)))


@dataclass(frozen=True)
class EntropyField:
    s: np.ndarray
    mask: np.ndarray
    theta_floor: float

    def sup_abs(self) -> float:
        if not np.any(self.mask):
            return 0.0
        return float(np.max(np.abs(self.s[self.mask])))


def entropy_field(state: SimState, gas: GasConstants,
                  theta_floor: float) -> EntropyField:
    """Specific entropy s = c_v*(log(R/A) + log theta - (gamma-1)*log rho0
    + (gamma-1)*log J), masked where theta <= theta_floor."""
    mask = state.theta > theta_floor
    s = np.full(state.theta.shape, np.nan)
    gm1 = gas.gamma - 1.0
    if np.any(mask):
        s[mask] = gas.c_v * (math.log(gas.r_gas / gas.a_entropy)
                             + np.log(state.theta[mask])
                             - gm1 * np.log(state.rho0[mask])
                             + gm1 * np.log(state.J[mask]))
    return EntropyField(s=s, mask=mask, theta_floor=float(theta_floor))


def default_theta_floor(theta0_max: float, temperature_scale: float = 0.0) -> float:
    """1e-12 of the initial temperature amplitude, with a fallback scale for
    identically-zero initial temperature."""
    scale = max(theta0_max, temperature_scale)
    if scale <= 0:
        scale = 1.0
    return 1e-12 * scale


def j_bounds(state: SimState, cons: ConservedQuantities, gas: GasConstants):
    """Explicit pointwise bounds for the Jacobian:

    exp(-(2/mu)*sqrt(2*m0*E0)) <= J <= exp((4/mu)*sqrt(2*m0*E0)) *
                                       (1 + (R/mu)*int_0^t rho0*theta dtau)
    """
    root = math.sqrt(2.0 * cons.m0 * cons.e0)
    lower = math.exp(-2.0 / gas.mu * root)
    upper = math.exp(4.0 / gas.mu * root) * (
        1.0 + gas.r_gas / gas.mu * state.int_rho0_theta)
    return lower, upper


@dataclass(frozen=True)
class KelvinDiagnostics:
    """Kelvin transform h(y,t) = y*theta(1/y,t) sampled at inverse far-field
    nodes, its least-squares slope through the origin, and the damping
    constant used for the normalized transform."""

    h_samples: np.ndarray  # rows (y, h)
    slope0: float
    n_t: float


def kelvin_diag(state: SimState, gas: GasConstants, y_fit: float,
                c1_override: float = None) -> KelvinDiagnostics:
    """Sample h at y = 1/Y for grid nodes |Y| >= 1/y_fit and fit h = slope*y.

    The damping constant combines the running maxima accumulated by the solver:
    n_t = (2/c_v)*(R*max|v_y| / j_min + sqrt(2)*kappa*C1 / j_min^2).
    """
    if y_fit <= 0:
        raise DiagnosticsError("y_fit must be positive")
    nodes = state.grid.nodes
    sel = np.abs(nodes) >= 1.0 / y_fit
    if np.count_nonzero(sel) < 4:
        raise DiagnosticsError("fewer than 4 far-field nodes available for the fit")
    bigY = nodes[sel]
    y = 1.0 / bigY
    h = y * state.theta[sel]
    slope0 = float(np.sum(h * y) / np.sum(y * y))
    c1 = state.c1_max if c1_override is None else c1_override
    n_t = (2.0 / gas.c_v) * (gas.r_gas * state.vy_max / state.j_min
                             + math.sqrt(2.0) * gas.kappa * c1 / state.j_min ** 2)
    return KelvinDiagnostics(h_samples=np.column_stack([y, h]),
                             slope0=slope0, n_t=float(n_t))


@dataclass(frozen=True)
class ScalingDiagnostics:
    beta: float
    beta0: float
    m_t: float
    f_samples: np.ndarray  # rows (y, f)


def scaling_beta0(gamma: float, ell_rho: float) -> float:
    """beta0 = max{2/((gamma-1)*ell_rho), 2/(ell_rho-2)}; defined for ell_rho > 2."""
    if ell_rho <= 2.0:
        raise DiagnosticsError("beta0 undefined for ell_rho <= 2")
    return max(2.0 / ((gamma - 1.0) * ell_rho), 2.0 / (ell_rho - 2.0))


def scaling_diag(state: SimState, gas: GasConstants,
                 ell_rho: float) -> ScalingDiagnostics:
    """Scaling transform f(y,t) = theta(y^(-beta), t) at beta = beta0, sampled
    at y = Y^(-1/beta) for far-field nodes Y > 0."""
    beta0 = scaling_beta0(gas.gamma, ell_rho)
    nodes = state.grid.nodes
    sel = nodes > 0
    bigY = nodes[sel]
    y = bigY ** (-1.0 / beta0)
    f = state.theta[sel]
    m_t = gas.r_gas * state.vy_max / (gas.c_v * state.j_min)
    return ScalingDiagnostics(beta=beta0, beta0=beta0, m_t=float(m_t),
                              f_samples=np.column_stack([y, f]))


def entropy_ratio_probe(state: SimState, ent: EntropyField, probes):
    """Pointwise s/(-log rho0) at the probe node indices; masked probes are
    skipped and reported in the warnings list."""
    ratios = []
    warnings = []
    for idx in probes:
        idx = int(idx)
        if state.rho0[idx] >= 1.0:
            warnings.append(f"probe {idx}: rho0 >= 1, ratio undefined")
            continue
        if not ent.mask[idx]:
            warnings.append(f"probe {idx}: theta below floor, skipped")
            continue
        ratios.append(float(ent.s[idx] / (-math.log(state.rho0[idx]))))
    return ratios, warnings


def default_probes(state: SimState, fraction: float = 0.05):
    """Outermost `fraction` of nodes on each side."""
    n = state.grid.nodes.size
    k = max(int(n * fraction), 1)
    return list(range(k)) + list(range(n - k, n))


def band_probes(state: SimState, lo: float, hi: float):
    """Node indices with lo <= |y| <= hi: far-field probes kept away from the
    truncation boundary."""
    if not (0 <= lo < hi):
        raise DiagnosticsError("need 0 <= lo < hi")
    y = np.abs(state.grid.nodes)
    return list(np.flatnonzero((y >= lo) & (y <= hi)))


@dataclass(frozen=True)
class FarfieldGrowthReport:
    violation_ratio: float
    envelope: np.ndarray


def farfield_growth_check(state: SimState) -> FarfieldGrowthReport:
    """Check theta(y) against the sqrt(|y|+1) envelope built from the discrete
    norms ||sqrt(rho0)*theta||_2 / sqrt(delta0) + sqrt(|y|+1)*||theta_y||_2,
    with delta0 = min rho0 on [-1, 1]."""
    nodes = state.grid.nodes
    w = state.grid.node_weights()
    core = np.abs(nodes) <= 1.0
    if not np.any(core):
        raise DiagnosticsError("grid does not cover [-1, 1]")
    delta0 = float(np.min(state.rho0[core]))
    norm_rt = math.sqrt(float(np.sum(w * state.rho0 * state.theta ** 2)))
    ty = np.gradient(state.theta, nodes, edge_order=2)
    norm_ty = math.sqrt(float(np.sum(w * ty ** 2)))
    envelope = norm_rt / math.sqrt(delta0) + np.sqrt(np.abs(nodes) + 1.0) * norm_ty
    if np.all(envelope == 0.0):
        ratio = 0.0
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(envelope > 0, state.theta / envelope,
                         np.where(state.theta > 0, np.inf, 0.0))
        ratio = float(np.max(r))
    return FarfieldGrowthReport(violation_ratio=ratio, envelope=envelope)


@dataclass
class RunReport:
    """Aligned time series of scalar diagnostics plus provenance."""

    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    sup_abs_s: list = field(default_factory=list)
    inf_theta: list = field(default_factory=list)
    inf_theta_window: list = field(default_factory=list)
    min_j: list = field(default_factory=list)
    max_j: list = field(default_factory=list)
    j_lower_margin: list = field(default_factory=list)
    j_upper_margin: list = field(default_factory=list)
    entropy_ratios: list = field(default_factory=list)
    kelvin_slope0: list = field(default_factory=list)
    kelvin_n_t: list = field(default_factory=list)
    farfield_violation: list = field(default_factory=list)
    monitored_norms: list = field(default_factory=list)
    step_times: list = field(default_factory=list)
    step_energies: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    j_lower_bound: float = 0.0
    clamp_mass: float = 0.0
    clamp_count: int = 0
    config_hash: str = ""
    complete: bool = True
    schema_version: int = 1

    _SERIES = ("times", "energy", "sup_abs_s", "inf_theta", "inf_theta_window",
               "min_j", "max_j", "j_lower_margin", "j_upper_margin",
               "entropy_ratios", "kelvin_slope0", "kelvin_n_t",
               "farfield_violation", "monitored_norms", "step_times",
               "step_energies", "warnings")

    def to_dict(self) -> dict:
        d = {
            "schema_version": self.schema_version,
            "config_hash": self.config_hash,
            "complete": self.complete,
            "j_lower_bound": self.j_lower_bound,
            "clamp_mass": self.clamp_mass,
            "clamp_count": self.clamp_count,
        }
        for key in self._SERIES:
            d[key] = getattr(self, key)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        rep = cls()
        rep.schema_version = d.get("schema_version", 1)
        rep.config_hash = d.get("config_hash", "")
        rep.complete = d.get("complete", True)
        rep.j_lower_bound = d.get("j_lower_bound", 0.0)
        rep.clamp_mass = d.get("clamp_mass", 0.0)
        rep.clamp_count = d.get("clamp_count", 0)
        for key in cls._SERIES:
            setattr(rep, key, d.get(key, []))
        return rep


def monitored_norms(state: SimState, gas: GasConstants) -> dict:
    """Scalar reductions of the norms tracked for finiteness (never asserted
    against numeric bounds: their continuum constants are generic)."""
    w = state.grid.node_weights()
    nodes = state.grid.nodes
    vy = velocity_gradient(state.grid, state.v)
    g_flux = compute_G(state, gas)
    sq = np.sqrt(state.rho0)
    return {
        "l2_sqrtrho_v": float(np.sqrt(np.sum(w * state.rho0 * state.v ** 2))),
        "l2_vy": float(np.sqrt(np.sum(w * vy ** 2))),
        "l2_sqrtrho_theta": float(np.sqrt(np.sum(w * state.rho0 * state.theta ** 2))),
        "l2_thetay": float(np.sqrt(np.sum(
            w * np.gradient(state.theta, nodes, edge_order=2) ** 2))),
        "l2_G": float(np.sqrt(np.sum(w * g_flux ** 2))),
        "l2_jy_over_sqrtrho": float(np.sqrt(np.sum(
            w * (np.gradient(state.J, nodes, edge_order=2) / sq) ** 2))),
    }
