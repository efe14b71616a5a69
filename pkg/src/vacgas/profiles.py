"""Initial-data families: density profiles with far-field vacuum, velocity and
temperature fields, and numerical checks of the decay/regularity hypotheses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]


class ProfileError(ValueError):
    """Invalid profile or field parameters."""


class Regime(str, Enum):
    SLOW = "Slow"
    FAST = "Fast"
    VERY_FAST = "VeryFast"


@dataclass(frozen=True)
class GasConstants:
    """Physical closure of the ideal polytropic gas model.

    gamma is derived, gamma - 1 == r_gas / c_v holds exactly by construction.
    """

    mu: float = 1.0
    kappa: float = 1.0
    r_gas: float = 1.0
    c_v: float = 1.0
    a_entropy: float = 1.0

    def __post_init__(self):
        for name in ("mu", "kappa", "r_gas", "c_v", "a_entropy"):
            if not getattr(self, name) > 0:
                raise ProfileError(f"gas constant {name} must be positive")

    @property
    def gamma(self) -> float:
        return 1.0 + self.r_gas / self.c_v


class Family(str, Enum):
    ALGEBRAIC = "Algebraic"
    EXPONENTIAL = "Exponential"


@dataclass(frozen=True)
class DensityProfile:
    """Even, strictly positive density with prescribed far-field decay.

    Algebraic:    rho0(y) = amp * (1 + y^2)^(-ell_rho / 2)
    Exponential:  rho0(y) = exp(-(1 + y^2)^delta)

    The algebraic family is parameterized by the decay exponent of (1 + |y|)
    directly, so regime thresholds read off ell_rho without factor-of-2 bookkeeping.
    """

    family: Family
    amp: float = 1.0
    ell_rho: float = 0.0
    delta: float = 0.0

    @property
    def decay_exponent(self) -> float:
        """Algebraic decay rate; infinite for the exponential family."""
        return self.ell_rho if self.family is Family.ALGEBRAIC else math.inf

    def rho0(self, y):
        y = np.asarray(y, dtype=float)
        if self.family is Family.ALGEBRAIC:
            return self.amp * (1.0 + y * y) ** (-self.ell_rho / 2.0)
        return np.exp(-((1.0 + y * y) ** self.delta))

    def drho0(self, y):
        y = np.asarray(y, dtype=float)
        if self.family is Family.ALGEBRAIC:
            ell = self.ell_rho
            return -self.amp * ell * y * (1.0 + y * y) ** (-ell / 2.0 - 1.0)
        d = self.delta
        u_p = 2.0 * d * y * (1.0 + y * y) ** (d - 1.0)
        return -u_p * self.rho0(y)

    def d2rho0(self, y):
        y = np.asarray(y, dtype=float)
        if self.family is Family.ALGEBRAIC:
            ell = self.ell_rho
            q = 1.0 + y * y
            return -self.amp * ell * q ** (-ell / 2.0 - 2.0) * (q - (ell + 2.0) * y * y)
        d = self.delta
        q = 1.0 + y * y
        u_p = 2.0 * d * y * q ** (d - 1.0)
        u_pp = 2.0 * d * q ** (d - 2.0) * (q + 2.0 * (d - 1.0) * y * y)
        return (u_p * u_p - u_pp) * self.rho0(y)


def make_density_profile(family, params) -> DensityProfile:
    """Build a density profile from a family name and parameter list.

    Algebraic expects (amp, ell_rho), both > 0; Exponential expects (delta,)
    with delta in (0, 1/2].
    """
    fam = Family(family)
    if fam is Family.ALGEBRAIC:
        if len(params) != 2:
            raise ProfileError("Algebraic profile takes (amp, ell_rho)")
        amp, ell_rho = float(params[0]), float(params[1])
        if amp <= 0 or ell_rho <= 0:
            raise ProfileError("amp and ell_rho must be positive")
        return DensityProfile(family=fam, amp=amp, ell_rho=ell_rho)
    if len(params) != 1:
        raise ProfileError("Exponential profile takes (delta,)")
    delta = float(params[0])
    if not (0.0 < delta <= 0.5):
        raise ProfileError("delta must lie in (0, 1/2]")
    return DensityProfile(family=fam, delta=delta)


@dataclass(frozen=True)
class InitialFields:
    """Analytic velocity/temperature initial data with first and second derivatives.

    g0 is the initial effective viscous flux mu*v0' - R*rho0*theta0, closed over
    the profile and gas constants it was built with.
    """

    v0: ArrayFn
    dv0: ArrayFn
    d2v0: ArrayFn
    theta0: ArrayFn
    dtheta0: ArrayFn
    d2theta0: ArrayFn
    g0: Optional[ArrayFn] = None


def attach_flux(fields: InitialFields, profile: DensityProfile,
                gas: GasConstants) -> InitialFields:
    """Return a copy of the fields with the g0 closure wired in."""

    def g0(y):
        return gas.mu * fields.dv0(y) - gas.r_gas * profile.rho0(y) * fields.theta0(y)

    return InitialFields(fields.v0, fields.dv0, fields.d2v0,
                         fields.theta0, fields.dtheta0, fields.d2theta0, g0)


def default_initial_fields(v_amp: float = 1.0, t_amp: float = 1.0,
                           profile: Optional[DensityProfile] = None,
                           gas: Optional[GasConstants] = None) -> InitialFields:
    """Gaussian-modulated defaults: v0 = v_amp*y*exp(-y^2), theta0 = t_amp*exp(-y^2).

    Smooth, rapidly decaying, and integrable against every admissible profile.
    """
    if t_amp < 0:
        raise ProfileError("t_amp must be nonnegative (theta0 >= 0)")

    def v0(y):
        y = np.asarray(y, dtype=float)
        return v_amp * y * np.exp(-y * y)

    def dv0(y):
        y = np.asarray(y, dtype=float)
        return v_amp * (1.0 - 2.0 * y * y) * np.exp(-y * y)

    def d2v0(y):
        y = np.asarray(y, dtype=float)
        return v_amp * (4.0 * y ** 3 - 6.0 * y) * np.exp(-y * y)

    def theta0(y):
        y = np.asarray(y, dtype=float)
        return t_amp * np.exp(-y * y)

    def dtheta0(y):
        y = np.asarray(y, dtype=float)
        return -2.0 * t_amp * y * np.exp(-y * y)

    def d2theta0(y):
        y = np.asarray(y, dtype=float)
        return t_amp * (4.0 * y * y - 2.0) * np.exp(-y * y)

    fields = InitialFields(v0, dv0, d2v0, theta0, dtheta0, d2theta0)
    if profile is not None and gas is not None:
        fields = attach_flux(fields, profile, gas)
    return fields


@dataclass(frozen=True)
class HypothesisReport:
    """Sampled suprema for the decay hypotheses and the regime classification."""

    k1_est: float
    k2_est: float
    k3_est: float
    regime: Regime
    g0_norm: float
    liminf_ok: bool


def classify_regime(ell_rho: float) -> Regime:
    if ell_rho <= 2.0:
        return Regime.SLOW
    if ell_rho < 4.0:
        return Regime.FAST
    return Regime.VERY_FAST


def check_hypotheses(profile: DensityProfile, fields: InitialFields,
                     sample_domain: tuple[float, float],
                     n_samples: int) -> HypothesisReport:
    """Estimate K1, K2, K3 and the flux norm by dense sampling.

    Suprema are sampled, not symbolic; on a bounded symmetric domain they are
    always finite, so no error paths exist here.
    """
    lo, hi = float(sample_domain[0]), float(sample_domain[1])
    if n_samples < 100:
        raise ProfileError("need at least 100 samples")
    if abs(lo + hi) > 1e-12 * max(abs(lo), abs(hi), 1.0):
        raise ProfileError("sample domain must be symmetric about 0")

    y = np.linspace(lo, hi, n_samples)
    rho = profile.rho0(y)
    k1 = float(np.max((np.abs(profile.drho0(y)) + np.abs(profile.d2rho0(y))) / rho))
    ell = profile.decay_exponent
    k2_power = ell if math.isfinite(ell) else 4.0
    k2 = float(np.max((1.0 + np.abs(y)) ** k2_power * rho))
    k3 = float(np.max((1.0 + np.abs(y)) ** 4 * rho))
    regime = classify_regime(ell)

    theta = fields.theta0(y)
    if np.any(theta < 0):
        raise ProfileError("theta0 must be nonnegative on the sample domain")

    g0_prime = (gas_free_flux_derivative(profile, fields, y))
    w = np.full(n_samples, (hi - lo) / (n_samples - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    g0_norm = float(np.sqrt(np.sum(w * (g0_prime / np.sqrt(rho)) ** 2)))

    tail = max(n_samples // 10, 2)
    ratio = np.abs(fields.dv0(y)) / np.sqrt(rho)
    liminf_ok = bool(np.isfinite(np.min(ratio[:tail])) and
                     np.isfinite(np.min(ratio[-tail:])))

    return HypothesisReport(k1_est=k1, k2_est=k2, k3_est=k3, regime=regime,
                            g0_norm=g0_norm, liminf_ok=liminf_ok)


def gas_free_flux_derivative(profile: DensityProfile, fields: InitialFields,
                             y: np.ndarray, gas: GasConstants = GasConstants()):
    """d/dy of G0 = mu*v0' - R*rho0*theta0 from the analytic derivatives."""
    return (gas.mu * fields.d2v0(y)
            - gas.r_gas * (profile.drho0(y) * fields.theta0(y)
                           + profile.rho0(y) * fields.dtheta0(y)))


def _smoothstep(x):
    """C^2 quintic smoothstep on [0, 1], clamped outside."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)


def _dsmoothstep(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * xc * xc * (1.0 - xc) ** 2, 0.0)


def _d2smoothstep(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, 60.0 * xc * (1.0 - xc) * (1.0 - 2.0 * xc), 0.0)


# |chi'| + |chi''| for the quintic smoothstep is below 7.66 everywhere,
# comfortably inside the advertised uniform bound.
CUTOFF_C0 = 60.0


def truncate_and_extend(fields: InitialFields, alpha_n: float,
                        beta_n: float) -> InitialFields:
    """Extend initial data from [alpha_n, beta_n] to [alpha_n-1, beta_n+1].

    The velocity is continued by a sine arc matching value and slope at the cut
    and reaching zero slope at the outer endpoints; the temperature is multiplied
    by a C^2 cutoff that is 1 on [alpha_n, beta_n] and 0 at the outer endpoints.
    The result satisfies v'(alpha_n-1) = v'(beta_n+1) = 0 and
    theta(alpha_n-1) = theta(beta_n+1) = 0 exactly.
    """
    if alpha_n >= beta_n:
        raise ProfileError("alpha_n must be less than beta_n")
    a, b = float(alpha_n), float(beta_n)
    va, dva = float(fields.v0(np.array(a))), float(fields.dv0(np.array(a)))
    vb, dvb = float(fields.v0(np.array(b))), float(fields.dv0(np.array(b)))
    half_pi = math.pi / 2.0

    def v0(y):
        y = np.asarray(y, dtype=float)
        left = va + (2.0 / math.pi) * dva * np.sin(half_pi * (y - a))
        right = vb + (2.0 / math.pi) * dvb * np.sin(half_pi * (y - b))
        mid = fields.v0(np.clip(y, a, b))
        return np.where(y < a, left, np.where(y > b, right, mid))

    def dv0(y):
        y = np.asarray(y, dtype=float)
        left = dva * np.cos(half_pi * (y - a))
        right = dvb * np.cos(half_pi * (y - b))
        mid = fields.dv0(np.clip(y, a, b))
        return np.where(y < a, left, np.where(y > b, right, mid))

    def d2v0(y):
        y = np.asarray(y, dtype=float)
        left = -half_pi * dva * np.sin(half_pi * (y - a))
        right = -half_pi * dvb * np.sin(half_pi * (y - b))
        mid = fields.d2v0(np.clip(y, a, b))
        return np.where(y < a, left, np.where(y > b, right, mid))

    def chi(y):
        y = np.asarray(y, dtype=float)
        return np.where(y < a, _smoothstep(y - (a - 1.0)),
                        np.where(y > b, _smoothstep((b + 1.0) - y), 1.0))

    def dchi(y):
        y = np.asarray(y, dtype=float)
        return np.where(y < a, _dsmoothstep(y - (a - 1.0)),
                        np.where(y > b, -_dsmoothstep((b + 1.0) - y), 0.0))

    def d2chi(y):
        y = np.asarray(y, dtype=float)
        return np.where(y < a, _d2smoothstep(y - (a - 1.0)),
                        np.where(y > b, _d2smoothstep((b + 1.0) - y), 0.0))

    def theta0(y):
        return fields.theta0(y) * chi(y)

    def dtheta0(y):
        return fields.dtheta0(y) * chi(y) + fields.theta0(y) * dchi(y)

    def d2theta0(y):
        return (fields.d2theta0(y) * chi(y)
                + 2.0 * fields.dtheta0(y) * dchi(y)
                + fields.theta0(y) * d2chi(y))

    return InitialFields(v0, dv0, d2v0, theta0, dtheta0, d2theta0)
