"""Level-curve construction: seeds, tracing, sampling, level bookkeeping."""

import math

import numpy as np
import pytest

from ladderlab.curves import (
    SLOT_EXPONENTS,
    LevelAssignment,
    find_seed,
    level_values,
    make_families,
    sample_curve,
    trace_curve,
)
from ladderlab.errors import ConfigError, CurveSingularityError
from ladderlab.factorization import GENERATORS
from ladderlab.specfun import bessel_j, gamma_complex, jacobi_dn, zeta_complex


@pytest.fixture(scope="module")
def families():
    return make_families()


def _free_assignment(families, n, l, level, anchor_t=0.0):
    """An assignment decoupled from any ladder anchor, for analytic fields."""
    return LevelAssignment(family=families[(n, l)], level=level,
                           alpha0=anchor_t, alpha1=anchor_t)


def _winding(points, center):
    ang = np.unwrap(np.angle(points - center))
    return (ang[-1] - ang[0]) / (2.0 * math.pi)


class TestAnalyticFamilies:
    def test_circle_trace_closes_and_stays_on_level(self, families):
        a = _free_assignment(families, 4, 1, 0.83)
        curve = trace_curve(a)
        assert curve.closed
        assert np.max(np.abs(np.abs(curve.points) - 0.83)) < 1e-9
        assert abs(curve.arc_length - 2.0 * math.pi * 0.83) < 0.05
        assert abs(_winding(curve.points, 0.0)) == pytest.approx(1.0, abs=0.02)

    def test_circle_samples_are_evenly_spaced(self, families):
        a = _free_assignment(families, 4, 1, 0.83)
        curve = trace_curve(a)
        pts = sample_curve(curve, 8)
        assert pts.shape == (8,)
        assert np.max(np.abs(np.abs(pts) - 0.83)) < 1e-12
        gaps = np.abs(np.diff(pts))
        assert np.max(gaps) / np.min(gaps) < 1.05

    def test_single_sample_is_the_seed(self, families):
        a = _free_assignment(families, 4, 1, 0.5)
        curve = trace_curve(a)
        pts = sample_curve(curve, 1)
        assert pts.shape == (1,)
        assert pts[0] == curve.points[0]

    def test_cos_seed_is_arccos_of_level(self, families):
        a = _free_assignment(families, 3, 2, 0.6)
        seed = find_seed(a)
        assert seed.imag == 0.0
        assert seed.real == pytest.approx(math.acos(0.6), abs=1e-14)

    def test_cos_oval_closes_around_half_pi(self, families):
        a = _free_assignment(families, 3, 2, 0.6)
        curve = trace_curve(a)
        assert curve.closed
        assert abs(_winding(curve.points, math.pi / 2.0)) == pytest.approx(1.0, abs=0.02)

    def test_gamma_seed_solves_gamma_equals_two_at_three(self, families):
        a = _free_assignment(families, 5, 1, 2.0)
        seed = find_seed(a)
        assert seed.imag == 0.0
        assert seed.real == pytest.approx(3.0, abs=1e-10)

    def test_gamma_level_set_is_an_open_arc(self, families):
        a = _free_assignment(families, 5, 1, 2.0)
        curve = trace_curve(a, max_arc_length=6.0)
        assert not curve.closed
        worst = max(abs(abs(gamma_complex(s)) - 2.0) for s in curve.points[::10])
        assert worst < 1e-10

    def test_bessel_real_axis_seed(self, families):
        a = _free_assignment(families, 6, 1, 0.7)   # J_0 reaches 0.7 on the real axis
        seed = find_seed(a)
        assert seed.imag == 0.0
        assert abs(bessel_j(0, seed)) == pytest.approx(0.7, abs=1e-12)

    def test_bessel_imaginary_axis_fallback(self, families):
        # |J_2| on the real axis peaks at ~0.486, below this level; the seed
        # must climb the imaginary axis where |J_2(iy)| grows monotonically.
        a = _free_assignment(families, 6, 3, 0.83)
        seed = find_seed(a)
        assert seed.real == 0.0
        assert seed.imag > 0.0
        assert abs(bessel_j(2, seed)) == pytest.approx(0.83, abs=1e-10)

    def test_jacobi_dn_seed_and_constancy(self, families):
        a = _free_assignment(families, 7, 3, 0.83)
        modulus = families[(7, 3)].param
        seed = find_seed(a)
        assert abs(jacobi_dn(seed, modulus) - 0.83) < 1e-12
        curve = trace_curve(a, max_arc_length=8.0)
        worst = max(abs(abs(jacobi_dn(s, modulus)) - 0.83) for s in curve.points[::20])
        assert worst < 1e-10

    def test_jacobi_sn_oval_closes(self, families):
        a = _free_assignment(families, 7, 1, 0.4)
        curve = trace_curve(a)
        assert curve.closed

    def test_zero_level_circle_is_singular(self, families):
        a = _free_assignment(families, 4, 1, 0.0)
        with pytest.raises(CurveSingularityError):
            trace_curve(a)


class TestZetaFamilies:
    def test_curve_around_a_critical_zero_closes_with_winding_one(self, families):
        rho_t = 14.134725141734694
        seed_t = rho_t + 0.05
        level = abs(zeta_complex(complex(0.5, seed_t))) ** 2
        a = _free_assignment(families, 1, 1, level, anchor_t=seed_t)
        curve = trace_curve(a)
        assert curve.closed
        assert abs(_winding(curve.points, complex(0.5, rho_t))) == pytest.approx(1.0, abs=0.02)

    def test_vertical_scan_seed_hits_the_level(self, families):
        a = _free_assignment(families, 2, 1, 0.63, anchor_t=321.7)
        seed = find_seed(a)
        assert seed.real == pytest.approx(0.5, abs=1e-12)
        assert abs(zeta_complex(seed)) == pytest.approx(0.63, abs=1e-9)


class TestFamilyConstruction:
    def test_rejects_bad_powers(self):
        with pytest.raises(ConfigError):
            make_families(n_pows=(0, 1, 2))
        with pytest.raises(ConfigError):
            make_families(p_orders=(1, 0.5, 2))
        with pytest.raises(ConfigError):
            make_families(ksq_values=(0.5, 0.5))

    def test_rejects_modulus_outside_unit_interval(self):
        with pytest.raises(ConfigError):
            make_families(ksq_values=(0.5, 0.5, 1.0))


@pytest.fixture(scope="module")
def assigns(unit_table, families):
    return level_values(unit_table, 100.0, 0.3, families)


class TestAnchoredLevels:
    L_VALUE = 100.0
    U_WIDTH = 0.3

    def test_levels_reproduce_the_anchor_trig_values(self, assigns, families):
        for l in (1, 2, 3):
            e_l = SLOT_EXPONENTS[l]
            trig = GENERATORS[l].fn(assigns[(2, l)].alpha0)
            for n in (2, 3, 6, 7):
                assert assigns[(n, l)].level ** e_l == pytest.approx(trig, rel=1e-12)
            n_l = families[(4, l)].param
            assert assigns[(4, l)].level ** (e_l * n_l) == pytest.approx(trig, rel=1e-12)
            assert assigns[(5, l)].level ** (-e_l) == pytest.approx(trig, rel=1e-12)

    def test_family_one_level_is_the_field_at_the_lifted_anchor(self, assigns):
        for l in (1, 2, 3):
            a = assigns[(1, l)]
            expect = abs(zeta_complex(complex(0.5, a.alpha1))) ** 2
            assert a.level == pytest.approx(expect, rel=1e-12)

    def test_every_family_traces_and_samples_on_level(self, assigns):
        for (n, l), a in sorted(assigns.items()):
            curve = trace_curve(a, max_arc_length=8.0)
            pts = sample_curve(curve, 4)
            scale = max(1.0, abs(a.target_sq))
            worst = max(abs(a.family.field_sq(s) - a.target_sq) for s in pts)
            assert worst <= 1e-8 * scale, f"family ({n},{l}) defect {worst:.3e}"

    def test_unattainable_dn_level_reports_the_required_modulus(self, unit_table):
        tight = make_families(ksq_values=(0.5, 0.5, 1e-6))
        with pytest.raises(ConfigError, match="raise the third"):
            level_values(unit_table, self.L_VALUE, self.U_WIDTH, tight)
