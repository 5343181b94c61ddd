"""Level curves of classical fields anchored at the factorization points.

Seven field families, each carrying three slots l = 1, 2, 3 tied to the trig
values at the factorization pair (alpha_0^l, alpha_1^l):

    1  |zeta(s)|^2          level = |zeta(1/2 + i alpha_1^l)|^2
    2  |zeta(s)|            level = q_l(alpha_0^l)^(1/e_l)
    3  |cos(s)|                       "
    4  |s|                  level = q_l(alpha_0^l)^(1/(e_l n_l))
    5  |Gamma(s)|           level = q_l(alpha_0^l)^(-1/e_l)
    6  |J_p(s)|             level = q_l(alpha_0^l)^(1/e_l)
    7  |sn/cn/dn(s, k_l)|             "       (kind chosen by the slot)

with q_1 = sin^2, q_2 = cos^2, q_3 = cos(2t) and slot exponents
e = (2, 2, 1).  A point on the (n, l) curve therefore reproduces the slot's
trig value exactly when the family factor is raised back to its exponent —
that is what makes the cross-bred equations hold at curve points.

Tracing runs on the smooth proxy |F|^2 (family 1 is already |zeta|^2), with a
central-difference gradient, a tangent predictor and a Newton corrector that
projects back onto the level set.  Curves may legitimately be open arcs
(|Gamma| and |zeta| level sets escape to infinity); closure is detected and
reported, never required.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    CurveSingularityError,
    RangeError,
    SeedNotFoundError,
)
from .factorization import GENERATORS, mean_value_point
from .ladder import LadderTable
from .numerics import find_root_bracketed
from .specfun import (
    EllipticModulus,
    bessel_j,
    gamma_complex,
    jacobi_cn,
    jacobi_dn,
    jacobi_sn,
    zeta_complex,
)

__all__ = [
    "SLOT_EXPONENTS",
    "LevelFamily",
    "LevelAssignment",
    "LevelCurve",
    "family_modulus",
    "make_families",
    "level_values",
    "find_seed",
    "trace_curve",
    "sample_curve",
]

# Exponent each slot's factor carries in the source equations.
SLOT_EXPONENTS = {1: 2, 2: 2, 3: 1}

_JACOBI_KINDS = {1: ("sn", jacobi_sn), 2: ("cn", jacobi_cn), 3: ("dn", jacobi_dn)}


def family_modulus(ksq: float) -> EllipticModulus:
    try:
        return EllipticModulus(float(ksq))
    except Exception as exc:
        raise ConfigError(f"invalid squared modulus {ksq!r}: {exc}") from exc


@dataclass(frozen=True)
class LevelFamily:
    """One (family, slot) field with its parameter."""

    n: int
    l: int
    label: str
    field: Callable[[complex], complex]
    param: object = None  # power n_l, order p_l, or EllipticModulus where relevant

    def field_sq(self, s: complex) -> float:
        """The smooth traced quantity: |F(s)|^2 (family 1 is already real)."""
        v = self.field(s)
        if self.n == 1:
            return float(v.real)
        return float(v.real * v.real + v.imag * v.imag)


@dataclass(frozen=True)
class LevelAssignment:
    """A family bound to its level through one factorization anchor."""

    family: LevelFamily
    level: float                # value |F| takes on the curve (family 1: |zeta|^2)
    alpha0: float
    alpha1: float

    @property
    def target_sq(self) -> float:
        return self.level if self.family.n == 1 else self.level * self.level


@dataclass(frozen=True)
class LevelCurve:
    assignment: LevelAssignment
    points: np.ndarray          # complex ordinates along the curve
    closed: bool
    arc_length: float


def _zeta_sq_field(s: complex) -> complex:
    z = zeta_complex(s)
    return complex(z.real * z.real + z.imag * z.imag, 0.0)


def make_families(*, n_pows: Sequence[int] = (1, 1, 2),
                  p_orders: Sequence[int] = (0, 1, 2),
                  ksq_values: Sequence[float] = (0.5, 0.5, 0.9)) -> dict[tuple[int, int], LevelFamily]:
    """All 21 (family, slot) fields for one parameter choice."""
    if len(n_pows) != 3 or any(int(v) < 1 for v in n_pows):
        raise ConfigError(f"n_pows must be three integers >= 1: got {n_pows!r}")
    if len(p_orders) != 3 or any(int(v) != v for v in p_orders):
        raise ConfigError(f"p_orders must be three integers: got {p_orders!r}")
    if len(ksq_values) != 3:
        raise ConfigError(f"ksq_values must have three entries: got {ksq_values!r}")
    moduli = [family_modulus(k) for k in ksq_values]

    fams: dict[tuple[int, int], LevelFamily] = {}
    for l in (1, 2, 3):
        p_l = int(p_orders[l - 1])
        m_l = moduli[l - 1]
        kind, jfun = _JACOBI_KINDS[l]
        fams[(1, l)] = LevelFamily(1, l, "|zeta|^2", _zeta_sq_field)
        fams[(2, l)] = LevelFamily(2, l, "|zeta|", zeta_complex)
        fams[(3, l)] = LevelFamily(3, l, "|cos|", cmath.cos)
        fams[(4, l)] = LevelFamily(4, l, f"|s| (power {int(n_pows[l-1])})",
                                   lambda s: s, int(n_pows[l - 1]))
        fams[(5, l)] = LevelFamily(5, l, "|Gamma|", gamma_complex)
        fams[(6, l)] = LevelFamily(6, l, f"|J_{p_l}|",
                                   lambda s, _p=p_l: bessel_j(_p, s), p_l)
        fams[(7, l)] = LevelFamily(7, l, f"|{kind}(., k^2={m_l.ksq:g})|",
                                   lambda s, _f=jfun, _m=m_l: _f(s, _m), m_l)
    return fams


def level_values(table: LadderTable, l_value: float, u_width: float,
                 families: dict[tuple[int, int], LevelFamily]) -> dict[tuple[int, int], LevelAssignment]:
    """Bind every family to its level via the factorization anchors of (L, U)."""
    segment = table.disconnected_set(l_value, u_width)
    triples = {l: mean_value_point(table, segment, l) for l in (1, 2, 3)}

    out: dict[tuple[int, int], LevelAssignment] = {}
    for l in (1, 2, 3):
        tr = triples[l]
        trig = float(GENERATORS[l].fn(tr.alpha0))
        if trig <= 0.0:
            raise ConfigError(
                f"slot {l} trig value {trig:.6f} at alpha_0 = {tr.alpha0:.6f} is not "
                f"positive; keep the segment width below pi/4 so cos(2t) stays positive")
        e_l = SLOT_EXPONENTS[l]
        for n in range(1, 8):
            fam = families[(n, l)]
            if n == 1:
                level = float(fam.field(complex(0.5, tr.alpha1)).real)
            elif n == 4:
                level = trig ** (1.0 / (e_l * int(fam.param)))
            elif n == 5:
                level = trig ** (-1.0 / e_l)
            else:
                level = trig ** (1.0 / e_l)
            if n == 7 and l == 3:
                kprime = fam.param.kprime
                if level <= kprime:
                    raise ConfigError(
                        f"dn level {level:.6f} is unattainable: dn(x, k) only takes "
                        f"values in [k', 1] with k' = {kprime:.6f}; raise the third "
                        f"squared modulus above 1 - c^2 = {1.0 - level * level:.6f}")
            out[(n, l)] = LevelAssignment(family=fam, level=level,
                                          alpha0=tr.alpha0, alpha1=tr.alpha1)
    return out


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------


def _seed_vertical_zeta(assignment: LevelAssignment) -> complex:
    target = assignment.target_sq
    center = assignment.alpha1
    from .specfun import zeta_critical_abs_sq  # fast scan; root polished on the field

    for half in (15.0, 30.0, 60.0):
        lo = max(center - half, 0.0)
        ts = np.linspace(lo, center + half, int(400 * half))
        vals = np.asarray(zeta_critical_abs_sq(ts), dtype=float) - target
        flips = np.flatnonzero(vals[:-1] * vals[1:] < 0.0)
        if not flips.size:
            continue
        mids = 0.5 * (ts[flips] + ts[flips + 1])
        k = flips[int(np.argmin(np.abs(mids - center)))]
        t_root = find_root_bracketed(
            lambda t: assignment.family.field_sq(complex(0.5, t)) - target,
            float(ts[k]), float(ts[k + 1]), xtol=1e-12)
        return complex(0.5, t_root)
    raise SeedNotFoundError(
        f"no critical-line crossing of |zeta|^2 = {target:.6e} within +-60 of "
        f"t = {center:.3f}")


def _seed_gamma(assignment: LevelAssignment) -> complex:
    c = assignment.level
    g = lambda x: abs(gamma_complex(complex(x, 0.0))) - c
    if c >= 1.0:
        lo, hi = 2.0, 100.0
        if g(hi) < 0.0:
            raise SeedNotFoundError(
                f"|Gamma| level {c:.3e} exceeds Gamma(100); refusing the bracket")
    elif c > 0.8857:
        lo, hi = 1.4616321449683623, 2.0
    else:
        raise SeedNotFoundError(
            f"|Gamma| never takes the value {c:.6f} on the positive real axis "
            f"(its minimum there is ~0.8856)")
    return complex(find_root_bracketed(g, lo, hi, xtol=1e-13), 0.0)


def _seed_bessel(assignment: LevelAssignment) -> complex:
    c = assignment.level
    fam = assignment.family
    xs = np.linspace(1e-4, 30.0, 3000)
    vals = np.array([abs(fam.field(complex(x, 0.0))) for x in xs]) - c
    flips = np.flatnonzero(vals[:-1] * vals[1:] < 0.0)
    if flips.size:
        k = int(flips[0])
        x = find_root_bracketed(lambda u: abs(fam.field(complex(u, 0.0))) - c,
                                float(xs[k]), float(xs[k + 1]), xtol=1e-13)
        return complex(x, 0.0)
    # The oscillating real-axis amplitude never reaches the level; climb the
    # imaginary axis instead, where |J_p(iy)| = I_p(y) grows monotonically.
    ys = np.linspace(1e-4, 25.0, 2500)
    vals = np.array([abs(fam.field(complex(0.0, y))) for y in ys]) - c
    flips = np.flatnonzero(vals[:-1] * vals[1:] < 0.0)
    if not flips.size:
        raise SeedNotFoundError(
            f"level {c:.6f} of {fam.label} out of reach on both the real axis "
            f"and the imaginary axis up to 25")
    k = int(flips[0])
    y = find_root_bracketed(lambda v: abs(fam.field(complex(0.0, v))) - c,
                            float(ys[k]), float(ys[k + 1]), xtol=1e-13)
    return complex(0.0, y)


def _seed_jacobi(assignment: LevelAssignment) -> complex:
    c = assignment.level
    fam = assignment.family
    modulus: EllipticModulus = fam.param
    big_k = modulus.quarter_period
    offsets = [0.0, modulus.quarter_period_conjugate / 8.0,
               modulus.quarter_period_conjugate / 4.0]
    for y_off in offsets:
        us = np.linspace(0.0, big_k, 2000)
        vals = np.array([abs(fam.field(complex(u, y_off))) for u in us]) - c
        exact = np.flatnonzero(vals == 0.0)
        if exact.size:
            return complex(float(us[exact[0]]), y_off)
        flips = np.flatnonzero(vals[:-1] * vals[1:] < 0.0)
        if flips.size:
            k = int(flips[0])
            u = find_root_bracketed(
                lambda w: abs(fam.field(complex(w, y_off))) - c,
                float(us[k]), float(us[k + 1]), xtol=1e-13)
            return complex(u, y_off)
    raise SeedNotFoundError(
        f"level {c:.6f} of {fam.label} not found on [0, K] or its parallels")


def find_seed(assignment: LevelAssignment) -> complex:
    """A point on the level curve, found by the family's own strategy."""
    n = assignment.family.n
    if n == 1:
        return complex(0.5, assignment.alpha1)
    if n == 2:
        return _seed_vertical_zeta(assignment)
    if n == 3:
        return complex(math.acos(min(assignment.level, 1.0)), 0.0)
    if n == 4:
        return complex(assignment.level, 0.0)
    if n == 5:
        return _seed_gamma(assignment)
    if n == 6:
        return _seed_bessel(assignment)
    if n == 7:
        return _seed_jacobi(assignment)
    raise ConfigError(f"unknown family index {n}")


# ---------------------------------------------------------------------------
# Tracing
# ---------------------------------------------------------------------------

_FD_H = 1e-6


def _gradient(fsq: Callable[[complex], float], s: complex) -> complex:
    gx = (fsq(s + _FD_H) - fsq(s - _FD_H)) / (2.0 * _FD_H)
    gy = (fsq(s + 1j * _FD_H) - fsq(s - 1j * _FD_H)) / (2.0 * _FD_H)
    return complex(gx, gy)


def _project(fsq: Callable[[complex], float], target: float, s: complex,
             scale: float) -> tuple[complex, int]:
    """Newton-project s onto {f = target}; returns the point and iterations used."""
    tol = 1e-12 * scale
    best_s, best_g = s, abs(fsq(s) - target)
    for it in range(8):
        g = fsq(s) - target
        if abs(g) <= tol:
            return s, it
        grad = _gradient(fsq, s)
        norm_sq = grad.real ** 2 + grad.imag ** 2
        if norm_sq < 1e-20 * scale * scale:
            raise CurveSingularityError(
                f"vanishing field gradient at {s:.6f} (|grad|^2 = {norm_sq:.3e}); "
                f"the level set is singular here")
        s = s - (g / norm_sq) * grad
        g_now = abs(fsq(s) - target)
        if g_now < best_g:
            best_s, best_g = s, g_now
        elif g_now > 4.0 * best_g:
            break  # stalled at the evaluation noise floor
    return best_s, 8


def trace_curve(assignment: LevelAssignment, seed: Optional[complex] = None, *,
                initial_step: float = 0.02, min_step: float = 1e-4,
                max_step: float = 0.1, max_points: int = 20000,
                max_arc_length: float = 60.0) -> LevelCurve:
    """Follow the level set from the seed by predictor-corrector steps.

    Open arcs are legal (several families have non-compact level sets): the
    trace stops at the arc-length budget and reports ``closed=False``.
    """
    fam = assignment.family
    fsq = fam.field_sq
    target = assignment.target_sq
    scale = max(1.0, abs(target))

    s0 = seed if seed is not None else find_seed(assignment)
    s0, _ = _project(fsq, target, complex(s0), scale)
    if abs(fsq(s0) - target) > 1e-8 * scale:
        raise SeedNotFoundError(
            f"seed {s0:.6f} does not lie on the level set of {fam.label} "
            f"(defect {abs(fsq(s0) - target):.3e})")

    pts = [s0]
    arc = 0.0
    step = float(initial_step)
    tangent_prev: Optional[complex] = None
    s = s0
    closed = False
    for _ in range(max_points):
        grad = _gradient(fsq, s)
        norm = abs(grad)
        if norm < 1e-10 * scale:
            raise CurveSingularityError(
                f"vanishing gradient while tracing {fam.label} at {s:.6f}")
        tangent = 1j * grad / norm
        if tangent_prev is not None:
            # Keep a consistent orientation.
            if (tangent.real * tangent_prev.real + tangent.imag * tangent_prev.imag) < 0.0:
                tangent = -tangent

        while True:
            candidate, its = _project(fsq, target, s + step * tangent, scale)
            turn = abs(candidate - s)
            if its <= 3 and (turn <= 2.5 * step):
                break
            if step <= min_step:
                break
            step = max(min_step, 0.5 * step)
        moved = abs(candidate - s)
        if moved < 0.25 * min_step:
            raise CurveSingularityError(
                f"trace of {fam.label} stalled at {s:.6f}")
        s = candidate
        pts.append(s)
        arc += moved
        tangent_prev = tangent
        if its <= 1:
            step = min(step * 1.3, max_step)

        if arc > 3.0 * initial_step and abs(s - s0) <= max(step, 2.0 * min_step):
            pts.append(s0)
            closed = True
            break
        if arc >= max_arc_length:
            break

    return LevelCurve(assignment=assignment, points=np.asarray(pts, dtype=complex),
                      closed=closed, arc_length=arc)


def sample_curve(curve: LevelCurve, m: int) -> np.ndarray:
    """m points spread evenly in arc length, re-projected and verified."""
    if m < 1:
        raise RangeError(f"sample count must be >= 1: got {m}")
    pts = curve.points
    if m == 1 or pts.size == 1:
        return pts[:1].copy()
    seg = np.abs(np.diff(pts))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = float(cum[-1])
    if total == 0.0:
        return np.repeat(pts[:1], m)
    if curve.closed:
        targets = total * np.arange(m) / m
    else:
        targets = total * np.arange(m) / (m - 1)
        targets[-1] = total
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, seg.size - 1)
    frac = (targets - cum[idx]) / np.where(seg[idx] > 0.0, seg[idx], 1.0)
    raw = pts[idx] + frac * (pts[idx + 1] - pts[idx])

    fam = curve.assignment.family
    target = curve.assignment.target_sq
    scale = max(1.0, abs(target))
    out = np.empty(m, dtype=complex)
    for i, s in enumerate(raw):
        s_proj, _ = _project(fam.field_sq, target, complex(s), scale)
        if abs(fam.field_sq(s_proj) - target) > 1e-8 * scale:
            raise CurveSingularityError(
                f"sample {i} on {fam.label} failed to re-project onto the level set")
        out[i] = s_proj
    return out
