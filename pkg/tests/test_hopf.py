import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vacgas.hopf import (
    BarrierSpec,
    HopfError,
    HypothesisViolation,
    InconclusiveSlope,
    OperatorCoefficients,
    barrier_value,
    comparison_check,
    hopf_slope_estimate,
    sample_lens,
    verify_barrier,
    zeta0,
)


def _const_coeffs(a=1.0, a0=0.0, b=0.0, c=0.0, lam=None, cap_lam=None, c_star=0.0):
    return OperatorCoefficients(
        a0=lambda x, t: np.full(np.shape(x), a0),
        a=lambda x, t: np.full(np.shape(x), a),
        b=lambda x, t: np.full(np.shape(x), b),
        c=lambda x, t: np.full(np.shape(x), c),
        lam=a if lam is None else lam,
        cap_lam=a if cap_lam is None else cap_lam,
        c_star=c_star)


def _unit_spec(zeta):
    return BarrierSpec(p0=(1.0, 0.0), r=1.0, p_star=(0.0, 0.0),
                       delta_star=0.2, zeta=zeta)


class TestZeta0:
    def test_laplacian_only(self):
        assert zeta0(1, 1.0, 1.0, 0.0, 0.7, 1.0) == 8.0

    def test_with_zero_order_constant(self):
        assert zeta0(1, 1.0, 1.0, 1.0, 1.0, 2.0) == 5.0

    def test_ellipticity_halves(self):
        assert zeta0(1, 2.0, 1.0, 1.0, 1.0, 2.0) == 2.5

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(HopfError):
            zeta0(1, 0.0, 1.0, 0.0, 1.0, 1.0)
        with pytest.raises(HopfError):
            zeta0(1, 1.0, 1.0, 0.0, 1.0, 0.0)

    @given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.0, 5.0),
           st.floats(0.1, 3.0), st.floats(0.1, 5.0), st.floats(0.5, 4.0))
    def test_scaling_relations(self, lam, cap, c_star, r, dist, k):
        cap = max(cap, lam)
        base = zeta0(1, lam, cap, c_star, r, dist)
        assert zeta0(1, lam, k * cap, k * c_star, r, dist) == pytest.approx(
            k * base, rel=1e-12)
        assert zeta0(1, k * lam, cap, c_star, r, dist) == pytest.approx(
            base / k, rel=1e-12)
        assert zeta0(1, lam, cap, c_star, r, k * dist) == pytest.approx(
            base / k ** 2, rel=1e-12)


class TestBarrierValue:
    def test_value_at_center(self):
        spec = _unit_spec(zeta=3.0)
        assert barrier_value(spec.p0_star, spec) == pytest.approx(
            1.0 - math.exp(-3.0 * 0.25), rel=1e-14)

    def test_vanishes_on_half_sphere(self):
        spec = _unit_spec(zeta=2.0)
        xc, tc = spec.p0_star
        for ang in np.linspace(0.0, 2 * math.pi, 17):
            p = (xc + 0.5 * math.cos(ang), tc + 0.5 * math.sin(ang))
            assert abs(barrier_value(p, spec)) < 1e-14

    def test_flattens_as_zeta_vanishes(self):
        p = (0.6, 0.1)
        vals = [abs(barrier_value(p, _unit_spec(z))) for z in (1e-2, 1e-4, 1e-6)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 1e-6

    def test_radial_symmetry(self):
        spec = _unit_spec(zeta=4.0)
        xc, tc = spec.p0_star
        rng = np.random.default_rng(0)
        for _ in range(50):
            rho = float(rng.uniform(0.0, 0.49))
            a1, a2 = rng.uniform(0.0, 2 * math.pi, 2)
            v1 = barrier_value((xc + rho * math.cos(a1), tc + rho * math.sin(a1)), spec)
            v2 = barrier_value((xc + rho * math.cos(a2), tc + rho * math.sin(a2)), spec)
            assert abs(v1 - v2) <= 1e-14


class TestBarrierSpec:
    def test_rejects_point_off_sphere(self):
        with pytest.raises(HopfError):
            BarrierSpec(p0=(1.0, 0.0), r=2.0, p_star=(0.0, 0.0),
                        delta_star=0.2, zeta=1.0)

    def test_rejects_purely_temporal_direction(self):
        with pytest.raises(HopfError):
            BarrierSpec(p0=(0.0, 0.0), r=1.0, p_star=(0.0, 1.0),
                        delta_star=0.1, zeta=1.0)

    def test_rejects_fat_small_ball(self):
        with pytest.raises(HopfError):
            BarrierSpec(p0=(1.0, 0.0), r=1.0, p_star=(0.0, 0.0),
                        delta_star=0.25, zeta=1.0)

    def test_midpoint_and_distance(self):
        spec = _unit_spec(zeta=1.0)
        assert spec.p0_star == (0.5, 0.0)
        assert spec.dist == 1.0


class TestVerifyBarrier:
    def test_sharp_barrier_passes(self):
        z0 = zeta0(1, 1.0, 1.0, 0.0, 1.0, 1.0)
        verdict = verify_barrier(_const_coeffs(), _unit_spec(2.0 * z0))
        assert verdict.passed
        assert verdict.worst_value < 0.0

    def test_sharp_barrier_passes_dense_grid_oracle(self):
        z0 = zeta0(1, 1.0, 1.0, 0.0, 1.0, 1.0)
        spec = _unit_spec(2.0 * z0)
        pts = sample_lens(spec, 100000, seed=5)
        x, t = pts[:, 0], pts[:, 1]
        xc, tc = spec.p0_star
        z = spec.zeta
        core = np.exp(-z * ((x - xc) ** 2 + (t - tc) ** 2))
        lphi = -(-2.0 * z + 4.0 * z * z * (x - xc) ** 2) * core
        assert np.all(lphi < 0.0)

    def test_blunt_barrier_fails(self):
        z0 = zeta0(1, 1.0, 1.0, 0.0, 1.0, 1.0)
        verdict = verify_barrier(_const_coeffs(), _unit_spec(0.01 * z0))
        assert not verdict.passed
        assert verdict.worst_value >= 0.0

    def test_zero_order_hypothesis_violation(self):
        # c big enough that c * dist exceeds C* somewhere in the lens
        coeffs = _const_coeffs(c=100.0, c_star=0.1)
        with pytest.raises(HypothesisViolation):
            verify_barrier(coeffs, _unit_spec(50.0))

    def test_ellipticity_violation(self):
        coeffs = _const_coeffs(a=0.5, lam=1.0, cap_lam=2.0)
        with pytest.raises(HypothesisViolation):
            verify_barrier(coeffs, _unit_spec(50.0))

    def test_drift_violation(self):
        coeffs = _const_coeffs(b=100.0, c_star=0.1)
        with pytest.raises(HypothesisViolation):
            verify_barrier(coeffs, _unit_spec(50.0))

    def test_requires_enough_samples(self):
        with pytest.raises(HopfError):
            verify_barrier(_const_coeffs(), _unit_spec(10.0), n_samples=500)

    def test_lens_samples_inside_both_balls(self):
        spec = _unit_spec(1.0)
        pts = sample_lens(spec, 2000, seed=1)
        xc, tc = spec.p0_star
        xs, ts = spec.p_star
        assert np.all((pts[:, 0] - xc) ** 2 + (pts[:, 1] - tc) ** 2 < 0.25)
        assert np.all((pts[:, 0] - xs) ** 2 + (pts[:, 1] - ts) ** 2
                      < spec.delta_star ** 2)


class TestComparisonCheck:
    def test_constant_positive_field(self):
        xs = np.linspace(0.0, 1.0, 10)
        ts = np.linspace(0.0, 1.0, 10)
        phi = np.ones((10, 10))
        res = comparison_check(_const_coeffs(c=1.0, c_star=1.0), xs, ts, phi)
        assert res.holds
        assert res.min_value == 1.0

    def test_parabolic_field_with_margin(self):
        eps = 1e-3
        xs = np.linspace(0.0, 1.0, 21)
        ts = np.linspace(0.0, 1.0, 21)
        X, _ = np.meshgrid(xs, ts, indexing="ij")
        phi = X * (1.0 - X) + eps
        res = comparison_check(_const_coeffs(), xs, ts, phi)
        assert res.holds
        assert res.min_value >= eps

    def test_negative_interior_reported(self):
        xs = np.linspace(0.0, 1.0, 10)
        ts = np.linspace(0.0, 1.0, 10)
        phi = np.ones((10, 10))
        phi[4, 5] = -2.0
        res = comparison_check(_const_coeffs(c=1.0, c_star=1.0), xs, ts, phi)
        assert not res.holds
        assert res.min_location == (4, 5)
        assert res.min_value == -2.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(HopfError):
            comparison_check(_const_coeffs(), np.linspace(0, 1, 5),
                             np.linspace(0, 1, 6), np.ones((5, 5)))


class TestSlopeEstimate:
    def test_linear_data(self):
        ells = np.array([0.4, 0.2, 0.1, 0.05])
        est = hopf_slope_estimate(ells, 3.0 * ells)
        assert est.slope == pytest.approx(-3.0, abs=1e-12)
        assert est.confident

    def test_quadratic_correction(self):
        ells = np.array([0.4, 0.2, 0.1, 0.05, 0.025])
        est = hopf_slope_estimate(ells, ells + ells ** 2)
        assert est.slope == pytest.approx(-1.0, abs=1e-10)
        assert est.confident

    def test_cubic_tangency(self):
        ells = 2.0 ** -np.arange(1, 9)
        est = hopf_slope_estimate(ells, ells ** 3)
        assert abs(est.slope) < 0.01
        assert est.confident
        assert not est.slope < 0.0  # strict negativity genuinely fails here

    def test_nonmonotone_data_inconclusive(self):
        ells = np.array([0.4, 0.2, 0.1, 0.05])
        with pytest.raises(InconclusiveSlope):
            hopf_slope_estimate(ells, np.array([0.1, -0.3, 0.25, -0.1]))

    def test_needs_four_points(self):
        with pytest.raises(HopfError):
            hopf_slope_estimate([0.2, 0.1, 0.05], [1.0, 2.0, 3.0])
        with pytest.raises(HopfError):
            hopf_slope_estimate([0.1, 0.2, 0.05, 0.01], [1.0, 2.0, 3.0, 4.0])


class TestOperatorCoefficients:
    def test_validation(self):
        with pytest.raises(HopfError):
            _const_coeffs(lam=0.0, cap_lam=1.0)
        with pytest.raises(HopfError):
            _const_coeffs(lam=2.0, cap_lam=1.0)
        with pytest.raises(HopfError):
            _const_coeffs(c_star=-1.0)
