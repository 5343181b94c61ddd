"""Cross-bred modulus equations on level curves.

Six catalog entries each rewrite the three-term hybrid identity with one
family of level-curve factors.  Crossing two different entries eliminates the
shared asymptotic factor and leaves an exact equation between products of
moduli evaluated anywhere on the corresponding level curves:

    sum_{l in {1,3}} |zeta(s_l^1)|^2 G_a(s_l^a)^{e_l} G_b(s_2^b)^{e_2}
  =
    sum_{l in {1,3}} |zeta(s_l^1)|^2 G_b(s_l^b)^{e_l} G_a(s_2^a)^{e_2}

with slot exponents e = (2, 2, 1).  The Gamma entry enters reciprocally; for
the zeta x Gamma pair the denominators are cleared by the least common product
of Gamma factors (which lands asymmetrically on the two sides), while the four
other Gamma pairs keep their fractional form.  ``normalize`` clears any
equation on demand.

Canonical text: within a term, factors sort by (family, slot), the zeta
prefix first, exponent-1 factors printed bare, reciprocals appended as
``/ |Gamma(...)|``.  The frozen renderings live in ``golden/``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .curves import (
    SLOT_EXPONENTS,
    LevelAssignment,
    LevelFamily,
    _gradient,
    find_seed,
    level_values,
    make_families,
    sample_curve,
    trace_curve,
)
from .errors import ConfigError
from .ladder import LadderTable

__all__ = [
    "TransmutationSpec",
    "Factor",
    "MetaEquation",
    "EquationReport",
    "catalog",
    "crossbreed",
    "generate_all",
    "normalize",
    "canonical_text",
    "equation_slots",
    "eliminates_cleanly",
    "evaluate",
    "seed_points",
    "perturb_off_curve",
    "verify_all",
    "equation_for_pair",
    "golden_dir",
    "golden_text",
]


@dataclass(frozen=True)
class TransmutationSpec:
    ident: str
    short: str            # the form accepted by --pair, e.g. "5.5"
    family: int           # level-curve family index in 2..7
    reciprocal: bool = False


_CATALOG = (
    TransmutationSpec("T3_10", "3.10", 2),
    TransmutationSpec("T4_5", "4.5", 3),
    TransmutationSpec("T4_10", "4.10", 4),
    TransmutationSpec("T5_5", "5.5", 5, reciprocal=True),
    TransmutationSpec("T5_10", "5.10", 6),
    TransmutationSpec("T5_15", "5.15", 7),
)

# The only pair whose cleared form is the default rendering.
_CLEARED_PAIR = frozenset({"T3_10", "T5_5"})


def catalog() -> tuple[TransmutationSpec, ...]:
    return _CATALOG


@dataclass(frozen=True)
class Factor:
    """One modulus factor |F(s_l^n)|^exponent, possibly in a denominator."""

    family: int
    l: int
    exponent: int          # slot exponent: 2 for l in {1, 2}, 1 for l = 3
    reciprocal: bool = False

    @property
    def slot(self) -> tuple[int, int]:
        return (self.family, self.l)


Term = tuple[Factor, ...]


@dataclass(frozen=True)
class MetaEquation:
    pair: tuple[TransmutationSpec, TransmutationSpec]
    lhs: tuple[Term, Term]
    rhs: tuple[Term, Term]
    normalized: bool

    @property
    def ident(self) -> str:
        return f"{self.pair[0].ident} x {self.pair[1].ident}"


@dataclass(frozen=True)
class EquationReport:
    ident: str
    points: dict[tuple[int, int], tuple[complex, ...]]
    lhs_value: float
    rhs_value: float
    residual: float


def _canon_term(factors: Sequence[Factor]) -> Term:
    return tuple(sorted(factors, key=lambda f: (f.reciprocal, f.family, f.l)))


def _clear_terms(sides: Sequence[Sequence[Term]]) -> list[tuple[Term, Term]]:
    denom_slots = sorted({f.slot for side in sides for term in side
                          for f in term if f.reciprocal})
    cleared = []
    for side in sides:
        new_terms = []
        for term in side:
            own = {f.slot for f in term if f.reciprocal}
            kept = [f for f in term if not f.reciprocal]
            extra = [Factor(fam, l, SLOT_EXPONENTS[l]) for fam, l in denom_slots
                     if (fam, l) not in own]
            new_terms.append(_canon_term(kept + extra))
        cleared.append(tuple(new_terms))
    return cleared


def crossbreed(a: TransmutationSpec, b: TransmutationSpec) -> MetaEquation:
    """Eliminate the common asymptotic factor between two catalog entries."""
    if a.ident == b.ident:
        raise ConfigError(
            f"crossing {a.ident} with itself cancels every factor and leaves 0 = 0")

    def g(spec: TransmutationSpec, l: int) -> Factor:
        return Factor(spec.family, l, SLOT_EXPONENTS[l], spec.reciprocal)

    lhs = tuple(_canon_term([Factor(1, l, 2), g(a, l), g(b, 2)]) for l in (1, 3))
    rhs = tuple(_canon_term([Factor(1, l, 2), g(b, l), g(a, 2)]) for l in (1, 3))
    normalized = not any(f.reciprocal for side in (lhs, rhs) for t in side for f in t)
    eq = MetaEquation(pair=(a, b), lhs=lhs, rhs=rhs, normalized=normalized)
    if not normalized and {a.ident, b.ident} == _CLEARED_PAIR:
        return normalize(eq)
    return eq


def normalize(eq: MetaEquation) -> MetaEquation:
    """Clear all denominators by the least common product of Gamma factors."""
    if eq.normalized:
        return eq
    lhs, rhs = _clear_terms([eq.lhs, eq.rhs])
    return MetaEquation(pair=eq.pair, lhs=lhs, rhs=rhs, normalized=True)


def generate_all() -> list[MetaEquation]:
    return [crossbreed(a, b) for a, b in combinations(_CATALOG, 2)]


def equation_for_pair(a_short: str, b_short: str) -> MetaEquation:
    """Look up the equation for two catalog entries, in catalog order."""
    by_short = {spec.short: spec for spec in _CATALOG}
    try:
        a, b = by_short[a_short.strip()], by_short[b_short.strip()]
    except KeyError as exc:
        raise ConfigError(
            f"unknown catalog entry {exc.args[0]!r}; choose from "
            f"{sorted(by_short)}") from exc
    if _CATALOG.index(a) > _CATALOG.index(b):
        a, b = b, a
    return crossbreed(a, b)


# ---------------------------------------------------------------------------
# Canonical rendering
# ---------------------------------------------------------------------------

_JACOBI_NAME = {1: "sn", 2: "cn", 3: "dn"}


def _factor_text(f: Factor) -> str:
    s = f"s_{f.l}^{f.family}"
    if f.family in (1, 2):
        core = f"|zeta({s})|"
    elif f.family == 3:
        core = f"|cos({s})|"
    elif f.family == 4:
        core = f"|{s}|"
    elif f.family == 5:
        core = f"|Gamma({s})|"
    elif f.family == 6:
        core = f"|J_{{p_{f.l}}}({s})|"
    elif f.family == 7:
        core = f"|{_JACOBI_NAME[f.l]}({s}, k_{f.l})|"
    else:
        raise ConfigError(f"unknown family index {f.family}")
    if f.family == 4:
        return core + (f"^(2*n_{f.l})" if f.exponent == 2 else f"^(n_{f.l})")
    return core + ("^2" if f.exponent == 2 else "")


def _term_text(term: Term) -> str:
    plain = [f for f in term if not f.reciprocal]
    recip = [f for f in term if f.reciprocal]
    text = " * ".join(_factor_text(f) for f in plain)
    for f in recip:
        text += f" / {_factor_text(f)}"
    return text


def canonical_text(eq: MetaEquation) -> str:
    lines = [eq.ident,
             _term_text(eq.lhs[0]),
             f"  + {_term_text(eq.lhs[1])}",
             f"  = {_term_text(eq.rhs[0])}",
             f"  + {_term_text(eq.rhs[1])}"]
    return "\n".join(lines) + "\n"


def golden_dir() -> Path:
    return Path(__file__).parent / "golden"


def golden_text(eq: MetaEquation) -> str:
    name = f"{eq.pair[0].ident}_x_{eq.pair[1].ident}.txt"
    return (golden_dir() / name).read_text()


# ---------------------------------------------------------------------------
# Abstract elimination check
# ---------------------------------------------------------------------------


def _abstract_monomial(term: Term) -> tuple:
    """Substitute each factor by the quantity it equals under the level binding.

    A zeta^1 factor at slot l becomes the symbol Z_l.  Any family factor whose
    printed form equals the slot's trig value contributes Q_l (this covers the
    reciprocal Gamma form); a cleared Gamma factor equals 1/q_l and contributes
    Q_l^(-1).
    """
    acc: Counter = Counter()
    for f in term:
        if f.family == 1:
            acc[("Z", f.l)] += 1
        elif f.family == 5 and not f.reciprocal:
            acc[("Q", f.l)] -= 1
        else:
            acc[("Q", f.l)] += 1
    return tuple(sorted((k, v) for k, v in acc.items() if v != 0))


def eliminates_cleanly(eq: MetaEquation) -> bool:
    """Both sides must reduce to the same multiset of abstract monomials."""
    lhs = sorted(_abstract_monomial(t) for t in eq.lhs)
    rhs = sorted(_abstract_monomial(t) for t in eq.rhs)
    return lhs == rhs


# ---------------------------------------------------------------------------
# Numerical evaluation
# ---------------------------------------------------------------------------

PointSource = Union[Mapping[tuple[int, int], complex],
                    Callable[[tuple[int, int], int], complex]]


def equation_slots(eq: MetaEquation) -> list[tuple[int, int]]:
    """Distinct (family, l) slots referenced, in first-occurrence order."""
    seen: dict[tuple[int, int], None] = {}
    for side in (eq.lhs, eq.rhs):
        for term in side:
            for f in term:
                seen.setdefault(f.slot, None)
    return list(seen)


def _factor_value(f: Factor, s: complex,
                  families: Mapping[tuple[int, int], LevelFamily]) -> float:
    fam = families[f.slot]
    if f.family == 1:
        value = float(fam.field(s).real)
    else:
        e = f.exponent * (int(fam.param) if f.family == 4 else 1)
        value = abs(fam.field(s)) ** e
    return 1.0 / value if f.reciprocal else value


def evaluate(eq: MetaEquation, points: PointSource,
             families: Mapping[tuple[int, int], LevelFamily]) -> EquationReport:
    """Evaluate both sides numerically.

    ``points`` is either one point per slot, or a callable
    ``(slot, occurrence_index) -> point`` consulted separately for every
    occurrence (the equations hold for any selection of on-curve points).
    """
    counts: Counter = Counter()
    used: dict[tuple[int, int], list[complex]] = {}

    def point_for(slot: tuple[int, int]) -> complex:
        k = counts[slot]
        counts[slot] += 1
        s = points(slot, k) if callable(points) else complex(points[slot])
        used.setdefault(slot, []).append(s)
        return s

    def side_value(side: tuple[Term, Term]) -> float:
        total = 0.0
        for term in side:
            prod = 1.0
            for f in term:
                prod *= _factor_value(f, point_for(f.slot), families)
            total += prod
        return total

    lhs_value = side_value(eq.lhs)
    rhs_value = side_value(eq.rhs)
    residual = abs(lhs_value - rhs_value) / max(abs(lhs_value), abs(rhs_value))
    return EquationReport(ident=eq.ident,
                          points={k: tuple(v) for k, v in used.items()},
                          lhs_value=lhs_value, rhs_value=rhs_value,
                          residual=residual)


def seed_points(assigns: Mapping[tuple[int, int], LevelAssignment],
                slots: Sequence[tuple[int, int]]) -> dict[tuple[int, int], complex]:
    return {slot: find_seed(assigns[slot]) for slot in slots}


def perturb_off_curve(assignment: LevelAssignment, s: complex,
                      distance: float = 1e-3) -> complex:
    """Displace a point off its curve along the field gradient."""
    grad = _gradient(assignment.family.field_sq, s)
    norm = abs(grad)
    if norm == 0.0:
        raise ConfigError(f"cannot perturb at {s}: the field gradient vanishes")
    return s + distance * grad / norm


def needed_slots() -> list[tuple[int, int]]:
    """Every (family, l) slot referenced by at least one equation."""
    return sorted({slot for eq in generate_all() for slot in equation_slots(eq)})


def verify_with_pools(pools: Mapping[tuple[int, int], np.ndarray],
                      families: Mapping[tuple[int, int], LevelFamily], *,
                      samples: int = 10, same_point_per_slot: bool = False,
                      seed: int = 0) -> list[EquationReport]:
    """Evaluate every equation at random on-curve assignments from the pools."""
    rng = np.random.default_rng(seed)
    reports: list[EquationReport] = []
    for eq in generate_all():
        for _ in range(samples):
            if same_point_per_slot:
                chosen = {slot: complex(pools[slot][rng.integers(pools[slot].size)])
                          for slot in equation_slots(eq)}
                reports.append(evaluate(eq, chosen, families))
            else:
                def draw(slot: tuple[int, int], _k: int) -> complex:
                    pool = pools[slot]
                    return complex(pool[rng.integers(pool.size)])
                reports.append(evaluate(eq, draw, families))
    return reports


def verify_all(table: LadderTable, *, l_value: float, u_width: float,
               families: Optional[Mapping[tuple[int, int], LevelFamily]] = None,
               samples: int = 10, same_point_per_slot: bool = False,
               seed: int = 0, pool_size: int = 48,
               max_arc_length: float = 12.0,
               progress: Optional[Callable[[str], None]] = None) -> list[EquationReport]:
    """Trace every needed curve once, then hammer all equations with random
    on-curve assignments drawn from per-curve sample pools."""
    if families is None:
        families = make_families()
    assigns = level_values(table, l_value, u_width, families)

    pools: dict[tuple[int, int], np.ndarray] = {}
    for slot in needed_slots():
        if progress:
            progress(f"tracing family {slot[0]} slot {slot[1]}")
        curve = trace_curve(assigns[slot], max_arc_length=max_arc_length)
        pools[slot] = sample_curve(curve, pool_size)

    return verify_with_pools(pools, families, samples=samples,
                             same_point_per_slot=same_point_per_slot, seed=seed)
