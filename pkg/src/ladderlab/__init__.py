"""ladderlab: exact factorization and meta-equation checks on the critical line.

The package builds the cumulative second-moment table of |zeta(1/2+it)|^2,
inverts it into the monotone substitution map phi_1 and its reverse iteration,
and uses those to verify a family of exact mean-value factorizations, a hybrid
three-term identity with an explicit error bound, and cross-bred
meta-functional equations sampled on level curves of classical special
functions.
"""

from .errors import (
    BracketError,
    CacheFormatError,
    ConfigError,
    CurveSingularityError,
    DomainError,
    LadderLabError,
    PoleError,
    QuadratureError,
    RangeError,
    ResolutionError,
    SeedNotFoundError,
)

__version__ = "0.1.0"

__all__ = [
    "LadderLabError",
    "ConfigError",
    "QuadratureError",
    "BracketError",
    "RangeError",
    "DomainError",
    "PoleError",
    "SeedNotFoundError",
    "CurveSingularityError",
    "ResolutionError",
    "CacheFormatError",
    "__version__",
]
