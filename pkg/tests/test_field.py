import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import CURVED, fields
from curvedmag.errors import BranchSingularityError, DegenerateShiftError, UnsupportedError
from curvedmag.field import (
    field_strength,
    gauge_function,
    induced_axial_component,
    maxwell_residual,
    potential_phi,
    verify_field_invariance,
)
from curvedmag.geometry import CylPoint, Plane, SpaceModel, TransversalShift, shift_pullback_cyl

H, S, E = SpaceModel.HYPERBOLIC, SpaceModel.SPHERICAL, SpaceModel.EUCLIDEAN


class TestPotential:
    @pytest.mark.parametrize("model", list(SpaceModel))
    def test_vanishes_on_axis(self, model):
        assert potential_phi(model, 1.7, 0.0) == 0.0
        assert field_strength(model, 1.7, 0.0) == 0.0

    def test_examples(self):
        assert potential_phi(H, 1.0, math.acosh(2.0)) == pytest.approx(-1.0, rel=1e-14)
        assert potential_phi(S, 2.0, math.pi) == pytest.approx(-4.0, rel=1e-14)
        assert field_strength(H, 3.0, 1.0) == pytest.approx(3.525603, rel=1e-6)
        assert field_strength(E, 2.0, 1.5) == 3.0

    @given(st.sampled_from(list(SpaceModel)), fields, st.floats(0.1, 2.9))
    def test_field_is_minus_potential_derivative(self, model, B, r):
        h = 1e-5
        fd = -(potential_phi(model, B, r + h) - potential_phi(model, B, r - h)) / (2 * h)
        assert fd == pytest.approx(field_strength(model, B, r), abs=1e-8)


class TestMaxwell:
    @pytest.mark.parametrize("model, B, p", [
        (H, 1.0, CylPoint(1.0, 0.0, 0.3)),
        (S, 2.0, CylPoint(1.0, 0.0, 0.2)),
        (E, 5.0, CylPoint(2.0, 0.0, 0.0)),
    ])
    def test_source_free(self, model, B, p):
        assert abs(maxwell_residual(model, B, p)) <= 1e-8


def _lam_fd(model, s, B, p, h=1e-5):
    def val(dr, dp):
        return gauge_function(model, s, B, CylPoint(p.r + dr, p.phi + dp, p.z)).lambda_value

    return ((val(h, 0) - val(-h, 0)) / (2 * h), (val(0, h) - val(0, -h)) / (2 * h))


def _pullback_potential(model, s, B, q, h=1e-5):
    """(A'_r', A'_phi') from central differences of the inverse shift."""
    inv = s.inverse()

    def phi_of(r, phi):
        return shift_pullback_cyl(model, inv, CylPoint(r, phi, q.z)).phi

    def d(a, b):
        return math.remainder(a - b, 2 * math.pi) / (2 * h)

    dphi_dr = d(phi_of(q.r + h, q.phi), phi_of(q.r - h, q.phi))
    dphi_dp = d(phi_of(q.r, q.phi + h), phi_of(q.r, q.phi - h))
    a = potential_phi(model, B, shift_pullback_cyl(model, inv, q).r)
    return dphi_dr * a, dphi_dp * a


class TestGauge:
    def test_hyperbolic_partials_match_fd(self):
        s = TransversalShift(Plane.PLANE01, 0.6)
        p = CylPoint(1.0, math.pi / 2, 0.0)
        g = gauge_function(H, s, 1.5, p)
        fd_r, fd_p = _lam_fd(H, s, 1.5, p)
        assert g.dLambda_dr == pytest.approx(fd_r, abs=1e-6)
        assert g.dLambda_dphi == pytest.approx(fd_p, abs=1e-6)

    def test_zero_field(self):
        g = gauge_function(H, TransversalShift(Plane.PLANE01, 0.4), 0.0, CylPoint(0.7, 2.0))
        assert (g.lambda_value, g.dLambda_dr, g.dLambda_dphi) == (0.0, 0.0, 0.0)

    def test_spherical_potential_relation(self):
        B = 1.3
        s = TransversalShift(Plane.PLANE01, 0.5)
        q = CylPoint(0.8, 1.0, 0.0)
        g = gauge_function(S, s, B, q)
        a_r, a_p = _pullback_potential(S, s, B, q)
        assert g.dLambda_dphi + B * (math.cos(q.r) - 1.0) == pytest.approx(a_p, abs=1e-8)
        assert g.dLambda_dr == pytest.approx(a_r, abs=1e-8)

    @pytest.mark.parametrize("model", CURVED)
    @pytest.mark.parametrize("plane", [Plane.PLANE01, Plane.PLANE02])
    def test_relation_random(self, model, plane):
        rng = np.random.default_rng(21)
        for _ in range(30):
            B = rng.uniform(-2, 2)
            s = TransversalShift(plane, rng.uniform(0.2, 1.2))
            q = CylPoint(rng.uniform(0.4, 1.4), rng.uniform(0, 2 * math.pi), rng.uniform(-1, 1))
            phi_rot = q.phi - (math.pi / 2 if plane is Plane.PLANE02 else 0.0)
            if abs(math.sin(phi_rot)) < 0.05:
                continue
            g = gauge_function(model, s, B, q)
            a_r, a_p = _pullback_potential(model, s, B, q)
            assert g.dLambda_dr == pytest.approx(a_r, abs=1e-8)
            assert potential_phi(model, B, q.r) + g.dLambda_dphi == pytest.approx(a_p, abs=1e-8)
            fd_r, fd_p = _lam_fd(model, s, B, q)
            assert g.dLambda_dr == pytest.approx(fd_r, abs=1e-6)
            assert g.dLambda_dphi == pytest.approx(fd_p, abs=1e-6)

    @pytest.mark.parametrize("model", CURVED)
    def test_integrability(self, model):
        rng = np.random.default_rng(8)
        h = 1e-5
        for _ in range(20):
            s = TransversalShift(Plane.PLANE01, rng.uniform(0.2, 1.2))
            q = CylPoint(rng.uniform(0.4, 1.4), rng.uniform(0.3, 2.8))

            def g(dr, dp):
                return gauge_function(model, s, 1.0, CylPoint(q.r + dr, q.phi + dp))

            mixed_a = (g(0, h).dLambda_dr - g(0, -h).dLambda_dr) / (2 * h)
            mixed_b = (g(h, 0).dLambda_dphi - g(-h, 0).dLambda_dphi) / (2 * h)
            assert mixed_a == pytest.approx(mixed_b, abs=1e-5)

    def test_one_sided_limit_on_branch_line(self):
        s = TransversalShift(Plane.PLANE01, 0.5)
        at = gauge_function(H, s, 1.0, CylPoint(1.0, 0.0)).lambda_value
        right = gauge_function(H, s, 1.0, CylPoint(1.0, 1e-9)).lambda_value
        assert at == pytest.approx(right, abs=1e-7)

    def test_zero_over_zero_raises(self):
        # image of the antipodal axis r = pi: the arctan argument is 0/0
        alpha = 0.8
        with pytest.raises(BranchSingularityError):
            gauge_function(S, TransversalShift(Plane.PLANE01, alpha), 1.0,
                           CylPoint(math.pi - alpha, 0.0))

    def test_invalid_shifts(self):
        with pytest.raises(DegenerateShiftError):
            gauge_function(H, TransversalShift(Plane.PLANE01, 0.0), 1.0, CylPoint(1.0, 1.0))
        with pytest.raises(UnsupportedError):
            gauge_function(S, TransversalShift(Plane.PLANE03, 0.3), 1.0, CylPoint(1.0, 1.0))


class TestInvariance:
    def test_identity_shift(self):
        assert verify_field_invariance(H, TransversalShift(Plane.PLANE01, 0.0), 2.0,
                                       CylPoint(1.2, 0.4)) == 0.0

    def test_examples(self):
        assert verify_field_invariance(H, TransversalShift(Plane.PLANE01, 0.7), 2.0,
                                       CylPoint(1.2, 0.4)) <= 1e-9
        assert verify_field_invariance(S, TransversalShift(Plane.PLANE01, 0.5), 1.0,
                                       CylPoint(0.9, 2.0)) <= 1e-9

    @pytest.mark.parametrize("model", CURVED)
    def test_plane03_generates_axial_component(self, model):
        rng = np.random.default_rng(4)
        for _ in range(20):
            beta = rng.choice([-1, 1]) * rng.uniform(0.2, 1.0)
            p = CylPoint(rng.uniform(0.3, 1.2), rng.uniform(0, 6), rng.uniform(-0.5, 0.5))
            assert abs(induced_axial_component(model, TransversalShift(Plane.PLANE03, beta), 1.0, p)) > 1e-6

    def test_axial_component_requires_plane03(self):
        with pytest.raises(UnsupportedError):
            induced_axial_component(H, TransversalShift(Plane.PLANE01, 0.3), 1.0, CylPoint(1.0, 0.0))
