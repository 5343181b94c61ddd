"""Three-term hybrid identity tying the factorization points together.

Because sin^2 + cos(2t) = cos^2 pointwise and the three base integrals add
the same way, the mean values of the three generators on one disconnected
set satisfy, exactly,

    Z~^2(a_1^1) sin^2(a_0^1) + Z~^2(a_1^3) cos(2 a_0^3) = Z~^2(a_1^2) cos^2(a_0^2),

where (a_0^l, a_1^l) is the factorization pair of generator l.  Replacing
the normalised square Z~^2 by the raw |zeta(1/2 + i a_1^l)|^2 deforms the
identity by the spread of omega across the three ordinates; the relative
defect epsilon of that raw form decays like 1/ln L, which the scan
quantifies through the bound ratio |epsilon| ln L / ln ln L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import RangeError
from .factorization import GENERATORS, FactorizationTriple, mean_value_point
from .ladder import LadderTable

__all__ = [
    "ATerms",
    "a_terms",
    "check_exact_hybrid",
    "EpsilonBreakdown",
    "epsilon",
    "epsilon_scan",
]


@dataclass(frozen=True)
class ATerms:
    """One generator's contribution, in both the exact and the raw form."""

    l: int
    alpha0: float
    alpha1: float
    trig: float                 # q_l(alpha0)
    ztilde_sq: float            # Z~^2(alpha1) = phi_1'(alpha1)
    zeta_sq: float              # |zeta(1/2 + i alpha1)|^2
    omega: float                # omega(alpha1), the ratio of the two above

    @property
    def exact_term(self) -> float:
        return self.ztilde_sq * self.trig

    @property
    def raw_term(self) -> float:
        return self.zeta_sq * self.trig


def _a_term(table: LadderTable, triple: FactorizationTriple) -> ATerms:
    gen = GENERATORS[triple.l]
    om = table.omega(triple.alpha1)
    ztilde = table.phi1_prime(triple.alpha1)
    return ATerms(l=triple.l, alpha0=triple.alpha0, alpha1=triple.alpha1,
                  trig=float(gen.fn(triple.alpha0)),
                  ztilde_sq=ztilde, zeta_sq=ztilde * om, omega=om)


def a_terms(table: LadderTable, l_value: float, u_width: float) -> tuple[ATerms, ATerms, ATerms]:
    """Factorization pairs and term values for l = 1, 2, 3 on one segment."""
    segment = table.disconnected_set(l_value, u_width)
    return tuple(_a_term(table, mean_value_point(table, segment, l))
                 for l in (1, 2, 3))


def check_exact_hybrid(table: LadderTable, l_value: float, u_width: float) -> float:
    """Residual of the exact three-term identity; ~1e-11 by construction."""
    t1, t2, t3 = a_terms(table, l_value, u_width)
    return abs(t1.exact_term + t3.exact_term - t2.exact_term)


@dataclass(frozen=True)
class EpsilonBreakdown:
    """Raw-form defect of the hybrid identity at one (L, U)."""

    l_value: float
    u_width: float
    epsilon: float              # (A_1 + A_3)/A_2 - 1 with raw terms
    epsilon_prime: float        # same, assembled through omega * Z~^2
    omega1: float
    omega2: float
    omega3: float

    @property
    def bound_ratio(self) -> float:
        log_l = math.log(self.l_value)
        return abs(self.epsilon) * log_l / math.log(log_l)


def epsilon(table: LadderTable, l_value: float, u_width: float) -> EpsilonBreakdown:
    if l_value < 3.0:
        raise RangeError(f"the bound ratio needs ln ln L > 0, so L >= 3: got {l_value}")
    t1, t2, t3 = a_terms(table, l_value, u_width)
    eps = (t1.raw_term + t3.raw_term) / t2.raw_term - 1.0
    eps_prime = ((t1.omega * t1.exact_term + t3.omega * t3.exact_term)
                 / (t2.omega * t2.exact_term) - 1.0)
    return EpsilonBreakdown(l_value=l_value, u_width=u_width,
                            epsilon=eps, epsilon_prime=eps_prime,
                            omega1=t1.omega, omega2=t2.omega, omega3=t3.omega)


def epsilon_scan(table: LadderTable, l_grid: Sequence[float],
                 u_width: float) -> list[EpsilonBreakdown]:
    return [epsilon(table, l_value, u_width) for l_value in l_grid]
