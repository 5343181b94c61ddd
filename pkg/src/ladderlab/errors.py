"""Exception hierarchy shared by all ladderlab modules.

Every failure mode that callers are expected to handle gets its own class so
the CLI can map them onto exit codes (config errors -> 2, numerical failures
-> 3) without string matching.
"""

from __future__ import annotations


class LadderLabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(LadderLabError):
    """A run configuration violates a documented constraint."""


class QuadratureError(LadderLabError):
    """Adaptive quadrature failed to converge.

    Carries the worst remaining subinterval and its error estimate so the
    caller can see *where* the integrand resisted subdivision.
    """

    def __init__(self, message: str, worst_interval: tuple[float, float] | None = None,
                 error_estimate: float | None = None):
        super().__init__(message)
        self.worst_interval = worst_interval
        self.error_estimate = error_estimate


class BracketError(LadderLabError):
    """A root bracket does not actually change sign."""


class RangeError(LadderLabError):
    """A requested target/abscissa lies outside the representable range."""


class DomainError(LadderLabError):
    """An evaluator was called outside its supported window."""


class PoleError(LadderLabError):
    """Evaluation requested at (or too close to) a pole."""


class SeedNotFoundError(LadderLabError):
    """No on-curve seed could be located for a level value."""


class CurveSingularityError(LadderLabError):
    """Curve tracing collapsed below the minimum step size."""


class ResolutionError(LadderLabError):
    """A scan failed to isolate a feature at the maximum resolution."""


class CacheFormatError(LadderLabError):
    """A persisted ladder cache failed validation on load."""
