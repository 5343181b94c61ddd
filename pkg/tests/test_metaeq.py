"""Crossbreeding engine: catalog, canonical forms, golden files, evaluation."""

from itertools import combinations

import numpy as np
import pytest

from ladderlab.curves import level_values, make_families
from ladderlab.errors import ConfigError
from ladderlab.metaeq import (
    canonical_text,
    catalog,
    crossbreed,
    eliminates_cleanly,
    equation_for_pair,
    equation_slots,
    evaluate,
    generate_all,
    golden_dir,
    golden_text,
    normalize,
    perturb_off_curve,
    seed_points,
    verify_all,
)

FRACTIONAL_IDENTS = {"T4_5 x T5_5", "T4_10 x T5_5", "T5_5 x T5_10", "T5_5 x T5_15"}


class TestCatalog:
    def test_six_entries_families_bijective(self):
        specs = catalog()
        assert len(specs) == 6
        assert sorted(s.family for s in specs) == [2, 3, 4, 5, 6, 7]

    def test_only_the_gamma_entry_is_reciprocal(self):
        recip = [s.ident for s in catalog() if s.reciprocal]
        assert recip == ["T5_5"]

    def test_pair_lookup_by_short_names(self):
        eq = equation_for_pair("5.5", "5.15")
        assert eq.ident == "T5_5 x T5_15"
        with pytest.raises(ConfigError, match="unknown catalog entry"):
            equation_for_pair("9.9", "5.5")


class TestGeneration:
    def test_fifteen_equations_in_combination_order(self):
        eqs = generate_all()
        assert len(eqs) == 15
        want = [(a.ident, b.ident) for a, b in combinations(catalog(), 2)]
        got = [(eq.pair[0].ident, eq.pair[1].ident) for eq in eqs]
        assert got == want
        assert len({frozenset(p) for p in got}) == 15

    def test_self_cross_is_rejected(self):
        a = catalog()[0]
        with pytest.raises(ConfigError, match="0 = 0"):
            crossbreed(a, a)

    def test_swapped_arguments_swap_the_sides(self):
        for a, b in combinations(catalog(), 2):
            ab, ba = crossbreed(a, b), crossbreed(b, a)
            assert ab.lhs == ba.rhs
            assert ab.rhs == ba.lhs

    def test_each_side_has_two_terms_sharing_none(self):
        for eq in generate_all():
            assert len(eq.lhs) == 2 and len(eq.rhs) == 2
            assert not (set(eq.lhs) & set(eq.rhs))

    def test_default_forms_fractional_exactly_for_four_gamma_pairs(self):
        eqs = generate_all()
        fractional = {eq.ident for eq in eqs if not eq.normalized}
        assert fractional == FRACTIONAL_IDENTS

    def test_zeta_gamma_pair_is_cleared_asymmetrically(self):
        eq = equation_for_pair("3.10", "5.5")
        assert eq.normalized
        gamma_slots = lambda term: sorted(
            (f.l, f.exponent) for f in term if f.family == 5)
        assert gamma_slots(eq.lhs[0]) == [(1, 2), (3, 1)]
        assert gamma_slots(eq.lhs[1]) == [(1, 2), (3, 1)]
        assert gamma_slots(eq.rhs[0]) == [(2, 2), (3, 1)]
        assert gamma_slots(eq.rhs[1]) == [(1, 2), (2, 2)]

    def test_normalize_removes_every_reciprocal(self):
        for eq in generate_all():
            n = normalize(eq)
            assert n.normalized
            assert not any(f.reciprocal for side in (n.lhs, n.rhs)
                           for t in side for f in t)
            assert normalize(n) is n


class TestCanonicalForm:
    @pytest.mark.parametrize("idx", range(15))
    def test_rendering_matches_the_golden_file(self, idx):
        eq = generate_all()[idx]
        assert canonical_text(eq) == golden_text(eq)

    def test_golden_directory_is_complete(self):
        files = sorted(p.name for p in golden_dir().glob("*.txt"))
        assert len(files) == 15

    def test_elimination_soundness_raw_and_normalized(self):
        for eq in generate_all():
            assert eliminates_cleanly(eq), eq.ident
            assert eliminates_cleanly(normalize(eq)), eq.ident


@pytest.fixture(scope="module")
def families():
    return make_families()


@pytest.fixture(scope="module")
def assigns(unit_table, families):
    return level_values(unit_table, 100.0, 0.3, families)


@pytest.fixture(scope="module")
def seed_assignment(assigns):
    slots = sorted({s for eq in generate_all() for s in equation_slots(eq)})
    return seed_points(assigns, slots)


class TestEvaluation:
    def test_twenty_distinct_slots_are_referenced(self):
        slots = {s for eq in generate_all() for s in equation_slots(eq)}
        assert len(slots) == 20
        assert (1, 2) not in slots

    def test_all_equations_hold_at_the_seeds(self, families, seed_assignment):
        for eq in generate_all():
            rep = evaluate(eq, seed_assignment, families)
            assert rep.residual < 1e-8, f"{eq.ident}: {rep.residual:.3e}"

    def test_normalized_forms_agree_at_the_seeds(self, families, seed_assignment):
        for eq in generate_all():
            rep = evaluate(normalize(eq), seed_assignment, families)
            assert rep.residual < 1e-8

    def test_off_curve_perturbation_is_detected(self, families, assigns, seed_assignment):
        eq = generate_all()[0]
        slot = (2, 1)
        moved = dict(seed_assignment)
        moved[slot] = perturb_off_curve(assigns[slot], seed_assignment[slot], 1e-3)
        rep = evaluate(eq, moved, families)
        assert rep.residual > 1e-5

    def test_report_carries_the_points_it_used(self, families, seed_assignment):
        eq = generate_all()[0]
        rep = evaluate(eq, seed_assignment, families)
        assert set(rep.points) == set(equation_slots(eq))
        assert rep.residual == abs(rep.lhs_value - rep.rhs_value) / max(
            abs(rep.lhs_value), abs(rep.rhs_value))


@pytest.fixture(scope="module")
def reports(unit_table, families):
    return verify_all(unit_table, l_value=100.0, u_width=0.3,
                      families=families, samples=4, seed=11, pool_size=24)


class TestVerifyAll:
    def test_report_count_and_residual_bound(self, reports):
        assert len(reports) == 15 * 4
        worst = max(r.residual for r in reports)
        assert worst < 1e-6

    def test_deterministic_under_a_fixed_seed(self, unit_table, families, reports):
        again = verify_all(unit_table, l_value=100.0, u_width=0.3,
                           families=families, samples=4, seed=11, pool_size=24)
        assert [r.residual for r in again] == [r.residual for r in reports]

    def test_same_point_mode_also_passes(self, unit_table, families):
        reports = verify_all(unit_table, l_value=100.0, u_width=0.3,
                             families=families, samples=2, seed=3,
                             pool_size=16, same_point_per_slot=True)
        assert len(reports) == 30
        assert max(r.residual for r in reports) < 1e-6
