"""Low-level numerical kernels: adaptive quadrature and bracketed root finding.

Quadrature is a worst-interval-first adaptive scheme on the 15-point
Gauss-Kronrod pair (QUADPACK dqk15 abscissae).  The embedded 7-point Gauss
rule supplies a per-panel error estimate from the same 15 evaluations, so
subdivision automatically tracks local oscillation: panels spanning several
oscillations report a large Kronrod-Gauss defect and are split first.

Root finding is Brent's method (inverse-quadratic / secant steps guarded by
bisection), plus a monotone-solve wrapper for inverting increasing maps such
as cumulative integrals.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BracketError, QuadratureError, RangeError

__all__ = [
    "Interval",
    "QuadratureResult",
    "integrate_adaptive",
    "find_root_bracketed",
    "solve_increasing",
]

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class Interval:
    """A finite oriented interval with lo < hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise RangeError(f"interval endpoints must be finite: got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise RangeError(f"interval requires lo < hi: got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class QuadratureResult:
    """Value, accumulated error estimate and the evaluation count of a quadrature."""

    value: float
    error_estimate: float
    evaluations: int
    panels: int


# 15-point Kronrod abscissae/weights and the embedded 7-point Gauss weights,
# positive half, as tabulated in QUADPACK's dqk15.
_XGK_HALF = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK_HALF = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG_HALF = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

# Full 15-node arrays, ordered from -1 to +1.
_NODES = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
_WGK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
# Gauss nodes sit at the odd Kronrod positions: indices 1,3,5,7(center),9,11,13.
_G_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_WG = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


def _as_batch_callable(f: Callable[[float], float]) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap f so it maps ndarray -> ndarray, probing once for native vector support."""
    state = {"vectorized": None}

    def call(x: np.ndarray) -> np.ndarray:
        if state["vectorized"] is None:
            try:
                y = np.asarray(f(x), dtype=float)
                if y.shape == x.shape:
                    state["vectorized"] = True
                    return y
            except (TypeError, ValueError):
                pass
            state["vectorized"] = False
        if state["vectorized"]:
            return np.asarray(f(x), dtype=float)
        return np.array([float(f(float(xi))) for xi in x], dtype=float)

    return call


def gk15_panels(fbatch: Callable[[np.ndarray], np.ndarray],
                a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the GK15 pair on many panels at once.

    Returns (kronrod_values, error_estimates) for each [a_i, b_i]; the error
    estimate is the plain |K15 - G7| defect, which is conservative for smooth
    panels and exactly what the refinement loop needs.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = center[:, None] + half[:, None] * _NODES[None, :]
    vals = fbatch(pts.ravel()).reshape(pts.shape)
    k = half * (vals * _WGK[None, :]).sum(axis=1)
    g = half * (vals[:, _G_IDX] * _WG[None, :]).sum(axis=1)
    return k, np.abs(k - g)


def integrate_adaptive(f: Callable[[float], float], interval: Interval,
                       rel_tol: float = 1.0e-10, *, abs_floor: float = 1.0e-12,
                       max_panels: int = 20000) -> QuadratureResult:
    """Adaptively integrate f over the interval to the requested relative tolerance.

    The absolute floor guards vanishing integrals: convergence is declared when
    the summed panel defects drop below max(rel_tol*|value|, abs_floor).
    Non-convergence raises QuadratureError carrying the worst subinterval.
    """
    if rel_tol <= 0:
        raise RangeError(f"rel_tol must be positive: got {rel_tol}")
    fbatch = _as_batch_callable(f)

    n0 = max(1, min(32, int(math.ceil(interval.width / 2.0))))
    edges = np.linspace(interval.lo, interval.hi, n0 + 1)
    ks, errs = gk15_panels(fbatch, edges[:-1], edges[1:])
    evals = 15 * n0

    heap: list[tuple[float, float, float, float]] = []
    for i in range(n0):
        heapq.heappush(heap, (-errs[i], edges[i], edges[i + 1], ks[i]))

    total = float(ks.sum())
    total_err = float(errs.sum())
    while total_err > max(rel_tol * abs(total), abs_floor):
        if len(heap) >= max_panels:
            neg_err, wa, wb, _ = heap[0]
            raise QuadratureError(
                f"quadrature did not converge after {len(heap)} panels; "
                f"worst subinterval [{wa:.6g}, {wb:.6g}] with error {-neg_err:.3e}",
                worst_interval=(wa, wb), error_estimate=-neg_err)
        neg_err, wa, wb, wk = heapq.heappop(heap)
        mid = 0.5 * (wa + wb)
        if mid <= wa or mid >= wb:
            # Interval is at floating-point resolution; put it back and give up.
            heapq.heappush(heap, (neg_err, wa, wb, wk))
            raise QuadratureError(
                f"quadrature stalled at floating-point resolution on "
                f"[{wa:.17g}, {wb:.17g}] with error {-neg_err:.3e}",
                worst_interval=(wa, wb), error_estimate=-neg_err)
        k2, e2 = gk15_panels(fbatch, np.array([wa, mid]), np.array([mid, wb]))
        evals += 30
        total += float(k2.sum()) - wk
        total_err += float(e2.sum()) - (-neg_err)
        heapq.heappush(heap, (-e2[0], wa, mid, k2[0]))
        heapq.heappush(heap, (-e2[1], mid, wb, k2[1]))

    return QuadratureResult(value=total, error_estimate=total_err,
                            evaluations=evals, panels=len(heap))


def find_root_bracketed(f: Callable[[float], float], a: float, b: float, *,
                        xtol: float = 1.0e-13, rtol: float = 8.0 * _EPS,
                        max_iter: int = 200) -> float:
    """Locate a root of f in [a, b] by Brent's method.

    The bracket must change sign (an exact zero at an endpoint is accepted);
    otherwise BracketError is raised.  Termination is on the bracket width
    xtol + rtol*|root|, the usual brentq criterion.
    """
    xpre, xcur = float(a), float(b)
    fpre, fcur = float(f(xpre)), float(f(xcur))
    if fpre == 0.0:
        return xpre
    if fcur == 0.0:
        return xcur
    if fpre * fcur > 0.0:
        raise BracketError(
            f"no sign change on [{a:.6g}, {b:.6g}]: f(a)={fpre:.6g}, f(b)={fcur:.6g}")

    xblk, fblk = 0.0, 0.0
    spre, scur = 0.0, 0.0
    for _ in range(max_iter):
        if fpre * fcur < 0.0:
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur = xcur, xblk
            xblk = xpre
            fpre, fcur = fcur, fblk
            fblk = fpre

        delta = 0.5 * (xtol + rtol * abs(xcur))
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0.0 or abs(sbis) < delta:
            return xcur

        if abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - delta):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis

        xpre, fpre = xcur, fcur
        if abs(scur) > delta:
            xcur += scur
        else:
            xcur += delta if sbis > 0 else -delta
        fcur = float(f(xcur))
    return xcur


def solve_increasing(g: Callable[[float], float], target: float, lo: float, hi: float, *,
                     xtol: float = 1.0e-13) -> float:
    """Solve g(x) = target on [lo, hi] for a (weakly sampled) increasing g.

    The target must lie inside [g(lo), g(hi)]; otherwise RangeError names the
    attainable range.  Insensitive to non-monotone numerical noise as long as
    the endpoint values genuinely bracket the target.
    """
    glo, ghi = float(g(lo)), float(g(hi))
    if not glo <= ghi:
        raise RangeError(
            f"map is not increasing on [{lo:.6g}, {hi:.6g}]: g(lo)={glo:.6g} > g(hi)={ghi:.6g}")
    if not (glo <= target <= ghi):
        raise RangeError(
            f"target {target:.6g} outside attainable range [{glo:.6g}, {ghi:.6g}] "
            f"of the increasing map on [{lo:.6g}, {hi:.6g}]")
    if target == glo:
        return float(lo)
    if target == ghi:
        return float(hi)
    return find_root_bracketed(lambda x: g(x) - target, lo, hi, xtol=xtol)
