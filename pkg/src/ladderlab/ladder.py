"""Cumulative second-moment table and the monotone substitution map phi_1.

The central object is ``LadderTable``: a strictly increasing knot table of

    H(T) = integral_0^T |zeta(1/2+it)|^2 dt

together with the inverse maps built on it,

    phi_1(T)  solving  G(phi) = H(T),   G(phi) = phi ln phi + (c - ln 2pi) phi,
    rev(T)    solving  H(x) = G(T)      (the reverse iteration),

where c is Euler's constant.  phi_1 is increasing, phi_1(0) = 2 pi e^{-c},
and the normalised square Z~^2(t) = phi_1'(t) = |zeta(1/2+it)|^2 / omega(t)
with omega(t) = ln phi_1(t) + 1 + c - ln 2pi = G'(phi_1(t)).

Everything downstream (exact factorizations, the hybrid identity, level-curve
sampling) only needs *self-consistency* between H, phi_1, phi_1' and rev, so
H between knots is always completed by local quadrature from the left knot of
the containing panel — never by interpolation, which would break the 1e-8
identity residuals by many orders of magnitude.  The critical-line fast path
has analytic jump points at t = 2 pi n^2 (main-sum length changes); those are
forced to be knots so every panel interior is smooth.

The knot table itself can be cached to disk as a two-column CSV and reloaded;
only (T, H) pairs are stored.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CacheFormatError, RangeError
from .numerics import Interval, gk15_panels, integrate_adaptive, find_root_bracketed
from .specfun import EULER_GAMMA, LN_TWO_PI, TWO_PI, _RS_SWITCH, zeta_critical_abs_sq

__all__ = [
    "PHI_AT_ZERO",
    "LadderPoint",
    "DisconnectedSet",
    "LadderTable",
    "build_table",
    "suggested_t_max",
    "g_of_phi",
    "g_prime_of_phi",
]

# phi_1(0): the root of G(phi) = 0, i.e. ln phi = ln 2pi - c.
PHI_AT_ZERO = TWO_PI * math.exp(-EULER_GAMMA)

_OMEGA_SHIFT = 1.0 + EULER_GAMMA - LN_TWO_PI

_CACHE_MAGIC = "#ladderlab-cache-v1"


def g_of_phi(phi: float) -> float:
    """G(phi) = phi ln phi + (c - ln 2pi) phi; increasing for phi > 2pi/e^(1+c)."""
    return phi * (math.log(phi) + EULER_GAMMA - LN_TWO_PI)


def g_prime_of_phi(phi: float) -> float:
    """G'(phi) = ln phi + 1 + c - ln 2pi."""
    return math.log(phi) + _OMEGA_SHIFT


def suggested_t_max(l_value: float, u_width: float = 0.7) -> float:
    """Table extent that safely covers reverse iteration of [pi L, pi L + U].

    rev(T) sits above T by roughly (1-c) T / ln T, so the suggestion pads the
    first-order estimate by a factor of two and a small absolute margin.
    """
    top = math.pi * l_value + u_width
    return top * (1.0 + 2.0 * (1.0 - EULER_GAMMA) / math.log(math.pi * l_value)) + 5.0


@dataclass(frozen=True)
class LadderPoint:
    """All ladder quantities evaluated at one ordinate t."""

    t: float
    h: float
    phi1: float
    phi1_prime: float
    omega: float


@dataclass(frozen=True)
class DisconnectedSet:
    """Base segment [pi L, pi L + U] plus its reverse-iterated lift.

    ``rho`` is the gap between the end of the base segment and the start of
    the lifted one; the two pieces never overlap for L >= 1 because rev(T)
    exceeds T by ~ (1-c) T / ln T.
    """

    l_value: float
    u_width: float
    base: Interval
    lifted: Interval

    @property
    def base_len(self) -> float:
        return self.base.width

    @property
    def lifted_len(self) -> float:
        return self.lifted.width

    @property
    def rho(self) -> float:
        return self.lifted.lo - self.base.hi

    @property
    def adjacent_len(self) -> float:
        return self.rho


class LadderTable:
    """Knot table of H plus the inverse maps phi_1 and rev built on it.

    Parameters
    ----------
    knots_t, knots_h:
        Strictly increasing arrays with ``knots_t[0] == knots_h[0] == 0``.
    tol:
        Relative accuracy target the table was built to; reused as the
        default tolerance of the local quadratures.
    integrand:
        The density whose antiderivative H is.  Defaults to the critical-line
        second moment; tests inject analytic densities (for which H has a
        closed form) to pin the plumbing down to machine accuracy.
    """

    def __init__(self, knots_t: np.ndarray, knots_h: np.ndarray, *,
                 tol: float = 1e-8,
                 integrand: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> None:
        knots_t = np.asarray(knots_t, dtype=float)
        knots_h = np.asarray(knots_h, dtype=float)
        if knots_t.ndim != 1 or knots_t.shape != knots_h.shape or knots_t.size < 2:
            raise CacheFormatError("knot arrays must be 1-d, equal-length, size >= 2")
        if knots_t[0] != 0.0 or knots_h[0] != 0.0:
            raise CacheFormatError("knot table must start at (0, 0)")
        if not (np.diff(knots_t) > 0).all() or not (np.diff(knots_h) > 0).all():
            raise CacheFormatError("knot table must be strictly increasing in both columns")
        if float(np.diff(knots_t).max()) > 1.0 + 1e-12:
            raise CacheFormatError("knot spacing above 1.0 defeats the local quadrature design")
        self.knots_t = knots_t
        self.knots_h = knots_h
        self.tol = float(tol)
        self.integrand = integrand if integrand is not None else zeta_critical_abs_sq
        self._integrand_scalar = lambda x: float(self.integrand(float(x)))

    # -- basic properties ---------------------------------------------------

    @property
    def t_max(self) -> float:
        return float(self.knots_t[-1])

    @property
    def h_max(self) -> float:
        return float(self.knots_h[-1])

    # -- H and its local completion ------------------------------------------

    def _panel_index(self, t: float) -> int:
        j = int(np.searchsorted(self.knots_t, t, side="right")) - 1
        return min(max(j, 0), self.knots_t.size - 2)

    def h(self, t: float) -> float:
        """H(t) = knot value + quadrature from the left knot of the panel."""
        t = float(t)
        if t < 0.0 or t > self.t_max * (1.0 + 1e-12):
            raise RangeError(f"t={t} outside table range [0, {self.t_max}]")
        t = min(t, self.t_max)
        j = self._panel_index(t)
        lo = float(self.knots_t[j])
        base = float(self.knots_h[j])
        width = t - lo
        if width == 0.0:
            return base
        if width < 1e-13:
            return base + width * self._integrand_scalar(0.5 * (lo + t))
        # The absolute floor sits just above the pointwise evaluation noise of
        # the fast path at large t (~1e-11); pushing below it only stalls the
        # subdivision on noise without gaining real accuracy.
        res = integrate_adaptive(self.integrand, Interval(lo, t),
                                 rel_tol=1e-12, abs_floor=1e-11)
        return base + res.value

    def h_many(self, ts: Sequence[float]) -> np.ndarray:
        """Batched H: single-panel GK15 fast path, scalar fallback where needed.

        Used by grid scans that only need bracketing accuracy; the fallback
        keeps every value within the same tolerance as :meth:`h`.
        """
        ts = np.asarray(ts, dtype=float)
        if ts.size == 0:
            return np.empty(0)
        if float(ts.min()) < 0.0 or float(ts.max()) > self.t_max * (1.0 + 1e-12):
            raise RangeError(f"batch outside table range [0, {self.t_max}]")
        j = np.clip(np.searchsorted(self.knots_t, ts, side="right") - 1,
                    0, self.knots_t.size - 2)
        lo = self.knots_t[j]
        out = self.knots_h[j].copy()
        width = ts - lo
        narrow = width < 1e-13
        wide = ~narrow
        if wide.any():
            vals, errs = gk15_panels(self.integrand, lo[wide], ts[wide])
            ok = errs <= np.maximum(1e-11 * np.abs(vals), 2e-11)
            idx = np.flatnonzero(wide)
            out[idx[ok]] += vals[ok]
            for i in idx[~ok]:
                out[i] = self.h(float(ts[i]))
        return out

    def phi1_many(self, ts: Sequence[float]) -> np.ndarray:
        return self._phi_from_h_many(self.h_many(ts))

    @staticmethod
    def _phi_from_h_many(h_vals: np.ndarray) -> np.ndarray:
        h_vals = np.asarray(h_vals, dtype=float)
        if (h_vals < 0.0).any():
            raise RangeError("H values must be nonnegative")
        phi = np.maximum(3.6, h_vals / np.maximum(
            np.log(np.maximum(h_vals, 3.0)) - 1.0, 1.0))
        target = np.maximum(1e-11, 4.0 * np.finfo(float).eps * np.maximum(h_vals, 1.0))
        for _ in range(80):
            resid = phi * (np.log(phi) + EULER_GAMMA - LN_TWO_PI) - h_vals
            if (np.abs(resid) <= target).all():
                break
            phi = np.maximum(phi - resid / (np.log(phi) + _OMEGA_SHIFT), 1.5)
        else:
            raise RangeError("batched phi_1 Newton did not converge")
        return np.where(h_vals == 0.0, PHI_AT_ZERO, phi)

    # -- phi_1 and friends ----------------------------------------------------

    @staticmethod
    def _phi_from_h(h_val: float) -> float:
        """Invert G(phi) = h by Newton; G is convex and increasing here."""
        if h_val < 0.0:
            raise RangeError(f"H value must be nonnegative: got {h_val}")
        if h_val == 0.0:
            return PHI_AT_ZERO
        phi = max(3.6, h_val / max(math.log(max(h_val, 3.0)) - 1.0, 1.0))
        target = max(1e-11, 4.0 * np.finfo(float).eps * max(h_val, 1.0))
        for _ in range(80):
            resid = g_of_phi(phi) - h_val
            step = resid / g_prime_of_phi(phi)
            phi = max(phi - step, 1.5)
            if abs(resid) <= target:
                break
        else:
            raise RangeError(f"phi_1 Newton did not converge for H={h_val}")
        return phi

    def phi1(self, t: float) -> float:
        """phi_1(t): the increasing solution of G(phi) = H(t)."""
        return self._phi_from_h(self.h(t))

    def omega(self, t: float) -> float:
        """omega(t) = ln phi_1(t) + 1 + c - ln 2pi = G'(phi_1(t)) >= 1."""
        return math.log(self.phi1(t)) + _OMEGA_SHIFT

    def phi1_prime(self, t: float, *, require_nonzero: bool = False) -> float:
        """Z~^2(t) = |zeta(1/2+it)|^2 / omega(t) = phi_1'(t).

        With ``require_nonzero`` the value is rejected when the numerator is
        below 1e-8 (too close to a critical zero for ratio checks to mean
        anything); quadrature paths keep the default and integrate through
        the zeros, where the density simply vanishes.
        """
        num = self._integrand_scalar(t)
        if require_nonzero and num <= 1e-8:
            raise RangeError(
                f"t={t} is within a zero well of the density (|.|^2 = {num:.3e} <= 1e-8)")
        return num / self.omega(t)

    def point(self, t: float) -> LadderPoint:
        h_val = self.h(t)
        phi = self._phi_from_h(h_val)
        om = math.log(phi) + _OMEGA_SHIFT
        return LadderPoint(t=float(t), h=h_val, phi1=phi,
                           phi1_prime=self._integrand_scalar(t) / om, omega=om)

    # -- reverse iteration ------------------------------------------------------

    def reverse_iterate(self, t_value: float) -> float:
        """rev(T): the x with H(x) = G(T); defined for T >= phi_1(0).

        Solved to an absolute H-residual near the double-precision floor of
        the H scale, so that downstream identity residuals inherit at most
        ~1e-10 from each endpoint.
        """
        t_value = float(t_value)
        if t_value < PHI_AT_ZERO:
            raise RangeError(
                f"reverse iteration needs T >= phi_1(0) = {PHI_AT_ZERO:.6f}: got {t_value}")
        g_val = g_of_phi(t_value)
        if g_val > self.h_max:
            raise RangeError(
                f"rev({t_value}) needs H up to {g_val:.3f} but the table stops at "
                f"H({self.t_max}) = {self.h_max:.3f}; rebuild with a larger t_max")
        if g_val == 0.0:
            return 0.0
        j = int(np.searchsorted(self.knots_h, g_val, side="right")) - 1
        j = min(max(j, 0), self.knots_t.size - 2)
        lo, hi = float(self.knots_t[j]), float(self.knots_t[j + 1])
        x = find_root_bracketed(lambda u: self.h(u) - g_val, lo, hi, xtol=1e-10)
        # Newton polish on the H-residual; H' is just the density.
        floor = max(1e-10, 8.0 * np.finfo(float).eps * g_val)
        for _ in range(4):
            resid = self.h(x) - g_val
            if abs(resid) <= floor:
                break
            slope = self._integrand_scalar(x)
            if slope <= 1e-8:
                break
            x = min(max(x - resid / slope, lo), hi)
        return x

    def disconnected_set(self, l_value: float, u_width: float) -> DisconnectedSet:
        """[pi L, pi L + U] together with its reverse-iterated lift."""
        if u_width <= 0.0 or u_width >= 0.5 * math.pi:
            raise RangeError(f"segment width must lie in (0, pi/2): got {u_width}")
        lo = math.pi * l_value
        base = Interval(lo, lo + u_width)
        lifted = Interval(self.reverse_iterate(base.lo), self.reverse_iterate(base.hi))
        return DisconnectedSet(l_value=float(l_value), u_width=float(u_width),
                               base=base, lifted=lifted)

    # -- persistence -----------------------------------------------------------

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(_CACHE_MAGIC + "\n")
            fh.write("T,H\n")
            for t, h in zip(self.knots_t, self.knots_h):
                fh.write(f"{t:.17g},{h:.17g}\n")

    @classmethod
    def load(cls, path: str | os.PathLike, *, tol: float = 1e-8,
             integrand: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> "LadderTable":
        with open(path, "r", encoding="ascii") as fh:
            magic = fh.readline().strip()
            if magic != _CACHE_MAGIC:
                raise CacheFormatError(
                    f"unrecognised cache header {magic!r} (expected {_CACHE_MAGIC!r})")
            header = fh.readline().strip()
            if header != "T,H":
                raise CacheFormatError(f"expected column header 'T,H', got {header!r}")
            try:
                data = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
            except ValueError as exc:
                raise CacheFormatError(f"malformed cache row: {exc}") from exc
        if data.size == 0 or data.shape[1] != 2:
            raise CacheFormatError("cache must contain two columns of rows")
        return cls(data[:, 0], data[:, 1], tol=tol, integrand=integrand)


def _base_knots(t_max: float, spacing: float) -> np.ndarray:
    """Regular grid plus the analytic jump points of the fast path."""
    n_panels = int(math.ceil(t_max / spacing))
    knots = list(np.linspace(0.0, t_max, n_panels + 1))
    n = int(math.floor(math.sqrt(_RS_SWITCH / TWO_PI))) + 1
    while TWO_PI * n * n < t_max:
        knots.append(TWO_PI * n * n)
        n += 1
    knots = np.unique(np.asarray(knots, dtype=float))
    # Drop near-duplicates created by a jump point grazing a grid point.
    keep = np.concatenate([[True], np.diff(knots) > 1e-9])
    return knots[keep]


def build_table(t_max: float, *, tol: float = 1e-8,
                integrand: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                base_spacing: float = 0.5,
                chunk: int = 4096,
                progress: Optional[Callable[[str], None]] = None) -> LadderTable:
    """Integrate the density from 0 to t_max into a knot table of H.

    Panels start at ``base_spacing`` and are bisected until each one's GK15
    defect is below max(1e-11 |I_i|, 1e-12).  Only the *per-panel* error
    matters for identity residuals (global offsets cancel between H, phi_1
    and rev, and each knot crossing of a downstream integral inherits at most
    one panel error divided by omega), so this keeps every crossing below
    ~1e-10 while the build stays a single refinement round on most panels.
    """
    if t_max <= 1.0:
        raise RangeError(f"table extent must exceed 1: got {t_max}")
    fn = integrand if integrand is not None else zeta_critical_abs_sq
    knots = _base_knots(float(t_max), float(base_spacing))

    def panel_pass(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        vals = np.empty_like(a)
        errs = np.empty_like(a)
        for s in range(0, a.size, chunk):
            sl = slice(s, min(s + chunk, a.size))
            vals[sl], errs[sl] = gk15_panels(fn, a[sl], b[sl])
            if progress is not None and a.size > 4 * chunk:
                progress(f"  panels {sl.stop}/{a.size}")
        return vals, errs

    if progress is not None:
        progress(f"building H table to t_max={t_max:g} ({knots.size - 1} base panels)")
    vals, errs = panel_pass(knots[:-1], knots[1:])
    for round_no in range(40):
        bad = errs > np.maximum(1e-11 * np.abs(vals), 1e-12)
        bad &= (knots[1:] - knots[:-1]) > 1e-10
        if not bad.any():
            break
        mids = 0.5 * (knots[:-1][bad] + knots[1:][bad])
        if progress is not None:
            progress(f"  refinement round {round_no + 1}: splitting {bad.sum()} panels")
        new_knots = np.sort(np.concatenate([knots, mids]))
        # Recompute only the split panels (two children each).
        lo_all, hi_all = new_knots[:-1], new_knots[1:]
        new_vals = np.empty(lo_all.size)
        new_errs = np.empty(lo_all.size)
        old_pos = np.searchsorted(knots, lo_all, side="right") - 1
        fresh = np.zeros(lo_all.size, dtype=bool)
        fresh[np.searchsorted(new_knots, np.concatenate(
            [knots[:-1][bad], mids]))] = True
        carried = ~fresh
        new_vals[carried] = vals[old_pos[carried]]
        new_errs[carried] = errs[old_pos[carried]]
        if fresh.any():
            new_vals[fresh], new_errs[fresh] = panel_pass(lo_all[fresh], hi_all[fresh])
        knots, vals, errs = new_knots, new_vals, new_errs
    else:
        raise RangeError("panel refinement failed to settle within 40 rounds")

    h_knots = np.concatenate([[0.0], np.cumsum(vals)])
    if progress is not None:
        progress(f"done: {knots.size} knots, H({t_max:g}) = {h_knots[-1]:.6f}")
    return LadderTable(knots, h_knots, tol=tol, integrand=fn)
