"""Numerical verification of the comparison principle and the boundary-point
(Hopf-type) lemma for degenerate parabolic operators

    L phi = -a * phi_xx + a0 * phi_t + b * phi_x + c * phi

in one space dimension plus time. The time-derivative weight a0 may change
sign; ellipticity is required only in the spatial direction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

CoefFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


class HopfError(ValueError):
    """Invalid barrier or operator setup."""


class HypothesisViolation(RuntimeError):
    """A sampled point violates the lemma's coefficient hypotheses; the
    barrier verdict is undefined there."""


class InconclusiveSlope(RuntimeError):
    """Difference-quotient data too irregular to extrapolate."""


@dataclass(frozen=True)
class OperatorCoefficients:
    """Coefficient functions of (x, t) with their admissibility constants."""

    a0: CoefFn
    a: CoefFn
    b: CoefFn
    c: CoefFn
    lam: float
    cap_lam: float
    c_star: float

    def __post_init__(self):
        if self.lam <= 0:
            raise HopfError("ellipticity lower bound must be positive")
        if self.cap_lam < self.lam:
            raise HopfError("upper ellipticity bound must be >= lower bound")
        if self.c_star < 0:
            raise HopfError("c_star must be nonnegative")


@dataclass(frozen=True)
class BarrierSpec:
    """Geometry of the boundary-point barrier.

    p0 is the ball center, p_star the boundary point under test, delta_star
    the radius of the small ball around p_star, zeta the barrier sharpness.
    p0_star is the midpoint of p0 and p_star.
    """

    p0: tuple[float, float]
    r: float
    p_star: tuple[float, float]
    delta_star: float
    zeta: float

    def __post_init__(self):
        x0, t0 = self.p0
        xs, ts = self.p_star
        d = math.hypot(xs - x0, ts - t0)
        if abs(d - self.r) > 1e-12 * max(self.r, 1.0):
            raise HopfError("p_star must lie on the sphere of radius r about p0")
        if xs == x0:
            raise HopfError("p_star must differ from p0 in the space direction")
        if not self.delta_star < abs(x0 - xs) / 4.0:
            raise HopfError("delta_star must be less than |x0 - x_star| / 4")
        if self.zeta <= 0:
            raise HopfError("zeta must be positive")

    @property
    def p0_star(self) -> tuple[float, float]:
        return (0.5 * (self.p0[0] + self.p_star[0]),
                0.5 * (self.p0[1] + self.p_star[1]))

    @property
    def dist(self) -> float:
        return abs(self.p0[0] - self.p_star[0])


def zeta0(n: int, lam: float, cap_lam: float, c_star: float,
          r: float, dist: float) -> float:
    """Barrier sharpness threshold (8*n*Lambda + 8*C* + 4*r*C*) / (lam*dist^2).

    The second numerator term is read with the same constant C* as the
    hypothesis set; see the comparison notes shipped with the test suite.
    """
    if lam <= 0:
        raise HopfError("lam must be positive")
    if dist <= 0:
        raise HopfError("dist must be positive")
    return (8.0 * n * cap_lam + 8.0 * c_star + 4.0 * r * c_star) / (lam * dist * dist)


def barrier_value(p, spec: BarrierSpec):
    """phi(p) = exp(-zeta*|p - p0_star|^2) - exp(-zeta*r^2/4).

    Vanishes exactly on |p - p0_star| = r/2 and is positive inside."""
    x, t = np.asarray(p[0], dtype=float), np.asarray(p[1], dtype=float)
    xc, tc = spec.p0_star
    d2 = (x - xc) ** 2 + (t - tc) ** 2
    return np.exp(-spec.zeta * d2) - math.exp(-spec.zeta * spec.r ** 2 / 4.0)


def _barrier_derivatives(x, t, spec: BarrierSpec):
    xc, tc = spec.p0_star
    z = spec.zeta
    core = np.exp(-z * ((x - xc) ** 2 + (t - tc) ** 2))
    phi_x = -2.0 * z * (x - xc) * core
    phi_t = -2.0 * z * (t - tc) * core
    phi_xx = (-2.0 * z + 4.0 * z * z * (x - xc) ** 2) * core
    return phi_x, phi_t, phi_xx


def sample_lens(spec: BarrierSpec, n_samples: int, seed: int = 0) -> np.ndarray:
    """Low-discrepancy samples of the lens B_{r/2}(p0_star) n B_{delta*}(p_star).

    The lens sits inside the bounding box of the small ball, so candidates are
    drawn there and filtered by membership."""
    xs, ts = spec.p_star
    xc, tc = spec.p0_star
    half_r = spec.r / 2.0
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    pts = np.empty((0, 2))
    while pts.shape[0] < n_samples:
        cand = sampler.random(max(4 * n_samples, 128))
        x = xs - spec.delta_star + 2.0 * spec.delta_star * cand[:, 0]
        t = ts - spec.delta_star + 2.0 * spec.delta_star * cand[:, 1]
        inside = (((x - xc) ** 2 + (t - tc) ** 2 < half_r ** 2)
                  & ((x - xs) ** 2 + (t - ts) ** 2 < spec.delta_star ** 2))
        pts = np.vstack([pts, np.column_stack([x[inside], t[inside]])])
    return pts[:n_samples]


@dataclass(frozen=True)
class BarrierVerdict:
    passed: bool
    worst_point: tuple[float, float]
    worst_value: float


def verify_barrier(coeffs: OperatorCoefficients, spec: BarrierSpec,
                   n_samples: int = 2000, seed: int = 0) -> BarrierVerdict:
    """Evaluate L(phi) at quasi-random samples of the lens; pass iff it is
    strictly negative everywhere sampled.

    The hypothesis inequalities of the lemma are checked at the same points;
    a violation raises HypothesisViolation rather than returning a verdict.
    The barrier derivatives are analytic, so the strict-inequality check is
    free of discretization noise."""
    if n_samples < 1000:
        raise HopfError("need at least 1000 samples")
    pts = sample_lens(spec, n_samples, seed=seed)
    x, t = pts[:, 0], pts[:, 1]

    a = np.broadcast_to(np.asarray(coeffs.a(x, t), dtype=float), x.shape)
    a0 = np.broadcast_to(np.asarray(coeffs.a0(x, t), dtype=float), x.shape)
    b = np.broadcast_to(np.asarray(coeffs.b(x, t), dtype=float), x.shape)
    c = np.broadcast_to(np.asarray(coeffs.c(x, t), dtype=float), x.shape)

    xc, tc = spec.p0_star
    xs, ts = spec.p_star
    bad = (a < coeffs.lam) | (a > coeffs.cap_lam)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise HypothesisViolation(
            f"ellipticity bounds violated at ({x[i]:.6g}, {t[i]:.6g})")
    drift = (t - tc) * a0 + (x - xc) * b
    bad = drift < -coeffs.c_star
    if np.any(bad):
        i = int(np.argmax(bad))
        raise HypothesisViolation(
            f"drift lower bound violated at ({x[i]:.6g}, {t[i]:.6g})")
    cdist = c * np.sqrt((x - xs) ** 2 + (t - ts) ** 2)
    bad = (c < 0) | (cdist > coeffs.c_star)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise HypothesisViolation(
            f"zero-order coefficient bound violated at ({x[i]:.6g}, {t[i]:.6g})")

    phi = barrier_value((x, t), spec)
    phi_x, phi_t, phi_xx = _barrier_derivatives(x, t, spec)
    lphi = -a * phi_xx + a0 * phi_t + b * phi_x + c * phi
    i = int(np.argmax(lphi))
    return BarrierVerdict(passed=bool(np.all(lphi < 0.0)),
                          worst_point=(float(x[i]), float(t[i])),
                          worst_value=float(lphi[i]))


@dataclass(frozen=True)
class ComparisonResult:
    holds: bool
    min_location: tuple[int, int]
    min_value: float


def comparison_check(coeffs: OperatorCoefficients, xs, ts, phi,
                     boundary_vals=None) -> ComparisonResult:
    """Brute-force minimum-principle check on a space-time rectangle.

    phi is a 2D array indexed [space, time]. L(phi) is evaluated at interior
    grid points with second-order stencils; if L(phi) > 0 there and phi >= 0 on
    the rectangle boundary, the interior minimum must be positive. The located
    minimum is returned either way."""
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (xs.size, ts.size):
        raise HopfError("phi shape must be (len(xs), len(ts))")

    X, T = np.meshgrid(xs[1:-1], ts[1:-1], indexing="ij")
    hx = xs[1] - xs[0]
    ht = ts[1] - ts[0]
    phi_xx = (phi[2:, 1:-1] - 2.0 * phi[1:-1, 1:-1] + phi[:-2, 1:-1]) / hx ** 2
    phi_x = (phi[2:, 1:-1] - phi[:-2, 1:-1]) / (2.0 * hx)
    phi_t = (phi[1:-1, 2:] - phi[1:-1, :-2]) / (2.0 * ht)
    a = np.broadcast_to(np.asarray(coeffs.a(X, T), dtype=float), X.shape)
    a0 = np.broadcast_to(np.asarray(coeffs.a0(X, T), dtype=float), X.shape)
    b = np.broadcast_to(np.asarray(coeffs.b(X, T), dtype=float), X.shape)
    c = np.broadcast_to(np.asarray(coeffs.c(X, T), dtype=float), X.shape)
    lphi = -a * phi_xx + a0 * phi_t + b * phi_x + c * phi[1:-1, 1:-1]

    if boundary_vals is None:
        boundary = np.concatenate([phi[0, :], phi[-1, :], phi[:, 0], phi[:, -1]])
    else:
        boundary = np.asarray(boundary_vals, dtype=float)

    interior = phi[1:-1, 1:-1]
    flat = int(np.argmin(interior))
    loc = np.unravel_index(flat, interior.shape)
    min_val = float(interior[loc])
    premises = bool(np.all(lphi > 0.0) and np.all(boundary >= 0.0))
    holds = premises and min_val > 0.0
    return ComparisonResult(holds=holds,
                            min_location=(int(loc[0]) + 1, int(loc[1]) + 1),
                            min_value=min_val)


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    confident: bool


def hopf_slope_estimate(ells, values, phi_at_pstar: float = 0.0) -> SlopeEstimate:
    """Extrapolate the outward difference quotient (phi(P*) - phi(P*-l*n))/l
    toward l -> 0.

    ells must be strictly decreasing with at least 4 entries. Richardson
    extrapolation assumes a first-order error model; the confidence flag is
    set when successive extrapolants are monotone and Cauchy within 10%."""
    ells = np.asarray(ells, dtype=float)
    values = np.asarray(values, dtype=float)
    if ells.size < 4 or values.size != ells.size:
        raise HopfError("need at least 4 matching (ell, value) pairs")
    if np.any(np.diff(ells) >= 0) or np.any(ells <= 0):
        raise HopfError("ells must be positive and strictly decreasing")

    q = (phi_at_pstar - values) / ells
    dq = np.diff(q)
    if np.any(dq > 0) and np.any(dq < 0):
        raise InconclusiveSlope("difference quotients are not monotone")

    extrap = q[1:] + (q[1:] - q[:-1]) * ells[1:] / (ells[:-1] - ells[1:])
    de = np.diff(extrap)
    monotone = not (np.any(de > 1e-14) and np.any(de < -1e-14))
    scale = max(float(np.max(np.abs(q))), 1e-12)
    cauchy = abs(extrap[-1] - extrap[-2]) <= 0.1 * scale
    return SlopeEstimate(slope=float(extrap[-1]),
                         confident=bool(monotone and cauchy))
