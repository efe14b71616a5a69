"""Semi-implicit time integration of the Lagrangian viscous gas system

    J_t = v_y
    rho0 * v_t = (mu*v_y/J - pi)_y
    c_v * rho0 * theta_t + v_y*pi - kappa*(theta_y/J)_y = mu*v_y^2/J

with pi = R*rho0*theta/J, on a truncated interval with v_y = theta = 0 at both
endpoints. Splitting per step: predict J explicitly, solve momentum implicitly,
solve temperature implicitly (M-matrix form, positivity preserving), correct J
with the trapezoid of old/new v_y.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import lapack

from vacgas.grid import Grid
from vacgas.profiles import GasConstants


class ZeroPivotError(RuntimeError):
    """Tridiagonal elimination hit an exactly zero pivot."""


class StepRejected(RuntimeError):
    """A step produced J <= 0 or theta below the clamp tolerance."""


class SolverAbort(RuntimeError):
    """Time stepping cannot continue; carries the last good state."""

    def __init__(self, message, state=None, log=None):
        super().__init__(message)
        self.state = state
        self.log = log


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve a tridiagonal system by elimination (LAPACK dgtsv).

    lower and upper have length n-1, diag and rhs length n. Raises
    ZeroPivotError on a singular system.
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.size
    if lower.size != n - 1 or upper.size != n - 1 or rhs.size != n:
        raise ValueError("tridiagonal band sizes do not conform")
    if n == 1:
        if diag[0] == 0.0:
            raise ZeroPivotError("zero pivot in 1x1 system")
        return rhs / diag
    _, _, _, x, info = lapack.dgtsv(lower, diag, upper, rhs)
    if info != 0:
        raise ZeroPivotError(f"zero pivot at row {info - 1}")
    return x


@dataclass(frozen=True)
class SimState:
    """Discrete fields at one time level plus run-accumulated integrals.

    The Eulerian density is never stored: it is rho0/J by construction.
    Running extrema (vy_max, j_min, j_max, c1_max) feed the damping constants
    of the far-field diagnostics.
    """

    grid: Grid
    t: float
    J: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    rho0: np.ndarray
    int_rho0_theta: np.ndarray
    theta_tol: float
    clamp_count: int = 0
    clamp_mass: float = 0.0
    vy_max: float = 0.0
    j_min: float = 1.0
    j_max: float = 1.0
    c1_max: float = 0.0


def make_state(grid: Grid, rho0, v0, theta0, theta_scale=None) -> SimState:
    """Initial state with J = 1 and zeroed accumulators."""
    rho0 = np.asarray(rho0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    n = grid.nodes.size
    if rho0.shape != (n,) or v0.shape != (n,) or theta0.shape != (n,):
        raise ValueError("field arrays must match the grid")
    if np.any(rho0 <= 0):
        raise ValueError("rho0 must be strictly positive")
    if np.any(theta0 < 0):
        raise ValueError("theta0 must be nonnegative")
    if theta_scale is None:
        # fall back to a kinetic scale when theta0 is identically zero
        theta_scale = max(float(theta0.max()), 0.5 * float(np.max(v0 * v0)))
    if theta_scale <= 0:
        theta_scale = 1.0
    vy0 = velocity_gradient(grid, v0)
    return SimState(grid=grid, t=0.0, J=np.ones(n), v=v0, theta=theta0,
                    rho0=rho0, int_rho0_theta=np.zeros(n),
                    theta_tol=1e-10 * float(theta_scale),
                    vy_max=float(np.max(np.abs(vy0))))


@dataclass(frozen=True)
class SolverConfig:
    dt_init: float = 1e-4
    dt_max: float = 5e-4
    cfl_factor: float = 0.5
    picard_iters: int = 2
    snapshot_times: tuple = ()
    gas: GasConstants = field(default_factory=GasConstants)

    def __post_init__(self):
        if self.dt_init > self.dt_max:
            raise ValueError("dt_init must not exceed dt_max")
        if not (0.0 < self.cfl_factor <= 1.0):
            raise ValueError("cfl_factor must lie in (0, 1]")
        if self.picard_iters < 1:
            raise ValueError("picard_iters must be at least 1")


def velocity_gradient(grid: Grid, v: np.ndarray) -> np.ndarray:
    """Second-order v_y at nodes, with the endpoint values forced to zero (BC)."""
    y = grid.nodes
    out = np.zeros_like(v)
    hl = y[1:-1] - y[:-2]
    hr = y[2:] - y[1:-1]
    out[1:-1] = (hl * hl * v[2:] - hr * hr * v[:-2]
                 - (hl * hl - hr * hr) * v[1:-1]) / (hl * hr * (hl + hr))
    return out


def compute_pressure(state: SimState, gas: GasConstants = None) -> np.ndarray:
    """pi = R * rho0 * theta / J, nodewise."""
    gas = gas or GasConstants()
    return gas.r_gas * state.rho0 * state.theta / state.J


def compute_G(state: SimState, gas: GasConstants = None) -> np.ndarray:
    """Effective viscous flux G = mu*v_y/J - pi.

    The boundary stencil forces v_y = 0, so G = -pi there; with the Dirichlet
    temperature condition that makes G vanish at the endpoints.
    """
    gas = gas or GasConstants()
    vy = velocity_gradient(state.grid, state.v)
    return gas.mu * vy / state.J - compute_pressure(state, gas)


def _face_geometry(grid: Grid):
    h = grid.widths                      # face spacings, length N
    w = grid.node_weights()              # control-volume widths, length N+1
    return h, w


def _harmonic_faces(coef: np.ndarray) -> np.ndarray:
    """Harmonic mean of a nodal coefficient at cell faces."""
    a, b = coef[:-1], coef[1:]
    return 2.0 * a * b / (a + b)


def _momentum_solve(grid, rho0, v_old, theta, J, dt, gas):
    h, w = _face_geometry(grid)
    m_face = _harmonic_faces(gas.mu / J)
    pi = gas.r_gas * rho0 * theta / J
    pi_face = 0.5 * (pi[:-1] + pi[1:])

    trans = m_face / h                   # face transmissibilities
    n = rho0.size
    diag = rho0 / dt
    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    diag[:-1] += trans / w[:-1]
    diag[1:] += trans / w[1:]
    upper -= trans / w[:-1]
    lower -= trans / w[1:]

    # conservative pressure gradient; boundary faces carry the nodal pressure,
    # which vanishes there under the Dirichlet temperature condition
    grad_pi = np.zeros(n)
    grad_pi[1:-1] = (pi_face[1:] - pi_face[:-1]) / w[1:-1]
    grad_pi[0] = (pi_face[0] - pi[0]) / w[0]
    grad_pi[-1] = (pi[-1] - pi_face[-1]) / w[-1]

    rhs = rho0 * v_old / dt - grad_pi
    return solve_tridiagonal(lower, diag, upper, rhs)


def _viscous_heating(grid, v_new, J, gas):
    """Nodal heating that sums (against trapezoid weights) to exactly the
    kinetic energy removed by the implicit viscous operator."""
    h, w = _face_geometry(grid)
    m_face = _harmonic_faces(gas.mu / J)
    dv = np.diff(v_new)
    face_power = m_face * dv * dv / h    # >= 0 per face
    q = np.zeros(v_new.size)
    q[:-1] += 0.5 * face_power
    q[1:] += 0.5 * face_power
    return q / w


def _temperature_solve(grid, rho0, theta_old, vy_new, heating, J, dt, gas):
    h, w = _face_geometry(grid)
    k_face = _harmonic_faces(gas.kappa / J)
    trans = k_face / h

    n = rho0.size
    diag = gas.c_v * rho0 / dt
    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    diag[:-1] += trans / w[:-1]
    diag[1:] += trans / w[1:]
    upper -= trans / w[:-1]
    lower -= trans / w[1:]

    # reaction v_y*pi = R*(rho0/J)*v_y * theta: implicit on the diagonal where
    # the coefficient is nonnegative (keeps the M-matrix), explicit otherwise
    q = gas.r_gas * (rho0 / J) * vy_new
    diag += np.maximum(q, 0.0)
    rhs = gas.c_v * rho0 * theta_old / dt - np.minimum(q, 0.0) * theta_old + heating

    # Dirichlet rows theta = 0 at both endpoints
    diag[0] = 1.0
    upper[0] = 0.0
    rhs[0] = 0.0
    diag[-1] = 1.0
    lower[-1] = 0.0
    rhs[-1] = 0.0
    return solve_tridiagonal(lower, diag, upper, rhs)


def step(state: SimState, cfg: SolverConfig, dt: float) -> SimState:
    """Advance one splitting step of size dt; raises StepRejected on failure."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    gas = cfg.gas
    grid = state.grid

    vy_old = velocity_gradient(grid, state.v)
    J_pred = state.J + dt * vy_old
    if np.any(J_pred <= 0):
        raise StepRejected("predicted J <= 0")

    theta_k = state.theta
    v_new = state.v
    vy_new = vy_old
    for _ in range(cfg.picard_iters):
        v_new = _momentum_solve(grid, state.rho0, state.v, theta_k, J_pred, dt, gas)
        vy_new = velocity_gradient(grid, v_new)
        heating = _viscous_heating(grid, v_new, J_pred, gas)
        theta_k = _temperature_solve(grid, state.rho0, state.theta, vy_new,
                                     heating, J_pred, dt, gas)

    J_new = state.J + 0.5 * dt * (vy_old + vy_new)
    if np.any(J_new <= 0):
        raise StepRejected("corrected J <= 0")
    if np.any(theta_k < -state.theta_tol):
        raise StepRejected("theta below clamp tolerance")

    negative = theta_k < 0.0
    n_clamped = int(np.count_nonzero(negative))
    clamp_mass = float(np.sum(state.rho0[negative] * -theta_k[negative]))
    if n_clamped:
        theta_k = np.where(negative, 0.0, theta_k)

    int_new = state.int_rho0_theta + 0.5 * dt * state.rho0 * (state.theta + theta_k)

    jy = np.gradient(J_new, grid.nodes, edge_order=2)
    c1 = float(np.max(np.abs(jy / state.rho0) / np.sqrt(np.abs(grid.nodes) + 1.0)))

    return replace(
        state,
        t=state.t + dt,
        J=J_new,
        v=v_new,
        theta=theta_k,
        int_rho0_theta=int_new,
        clamp_count=state.clamp_count + n_clamped,
        clamp_mass=state.clamp_mass + clamp_mass,
        vy_max=max(state.vy_max, float(np.max(np.abs(vy_new)))),
        j_min=min(state.j_min, float(np.min(J_new))),
        j_max=max(state.j_max, float(np.max(J_new))),
        c1_max=max(state.c1_max, c1),
    )


@dataclass
class StepLog:
    times: list = field(default_factory=list)
    dts: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    rejected: int = 0
    clamped: int = 0


_V_FLOOR = 1e-8
_MAX_CONSECUTIVE_REJECTS = 20


def _energy(state: SimState, gas: GasConstants) -> float:
    w = state.grid.node_weights()
    return float(np.sum(w * state.rho0 * (0.5 * state.v ** 2 + gas.c_v * state.theta)))


def run(state0: SimState, t_end: float, cfg: SolverConfig):
    """Integrate to t_end with adaptive dt, hitting snapshot times exactly.

    Returns (final state, snapshots, log) where snapshots is a list of
    (time, SimState) at the configured snapshot times.
    """
    if t_end < state0.t:
        raise ValueError("t_end must not precede the current time")
    log = StepLog()
    snaps = []
    if t_end == state0.t:
        return state0, snaps, log

    targets = sorted(t for t in cfg.snapshot_times if state0.t < t <= t_end)
    targets.append(t_end)

    state = state0
    dt = cfg.dt_init
    rejects = 0
    for target in targets:
        while state.t < target:
            remaining = target - state.t
            if remaining <= 1e-12 * max(target, 1.0):
                break  # round-off residue, the exact landing below absorbs it
            dt_cfl = cfg.cfl_factor * state.grid.min_width / max(
                float(np.max(np.abs(state.v))), _V_FLOOR)
            dt = min(dt * 2.0, cfg.dt_max, dt_cfl)
            if dt < 1e-12 * t_end:
                raise SolverAbort(
                    f"dt collapsed to {dt:.3e} at t={state.t:.6f}",
                    state=state, log=log)
            dt_try = min(dt, remaining)
            try:
                new_state = step(state, cfg, dt_try)
            except StepRejected as exc:
                log.rejected += 1
                rejects += 1
                if rejects >= _MAX_CONSECUTIVE_REJECTS:
                    raise SolverAbort(
                        f"step rejected {rejects} times consecutively: {exc}",
                        state=state, log=log)
                dt = 0.5 * dt_try
                continue
            rejects = 0
            log.clamped += new_state.clamp_count - state.clamp_count
            state = new_state
            log.times.append(state.t)
            log.dts.append(dt_try)
            log.energies.append(_energy(state, cfg.gas))
        # exact landing on the target time
        state = replace(state, t=target)
        if target != t_end or target in cfg.snapshot_times:
            snaps.append((target, state))
    return state, snaps, log
