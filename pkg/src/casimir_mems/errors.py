"""Exception types shared across the toolkit."""
from __future__ import annotations


class CasimirMemsError(Exception):
    """Base class for all toolkit-specific errors."""


class DomainError(CasimirMemsError, ValueError):
    """An input lies outside the physical domain of a formula.

    The message names the offending field.
    """


class UnsupportedOrderError(DomainError):
    """A derivative order outside the supported range was requested."""


class InstabilityError(CasimirMemsError):
    """Attractive force gradient exceeds the restoring stiffness.

    The effective resonance frequency squared went non-positive: the
    plate would snap toward the sphere instead of oscillating.
    """


class PullInError(CasimirMemsError):
    """The integrated gap closed below the contact threshold.

    Attributes
    ----------
    time : float
        Simulation time (s) at which contact was detected.
    """

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class StiffnessError(CasimirMemsError):
    """Adaptive step size underflowed; the problem became intractable."""


class InsufficientDataError(CasimirMemsError, ValueError):
    """A data segment is too short for the requested analysis."""


class FitError(CasimirMemsError):
    """Base class for calibration-fit failures."""


class NotAMaximumError(FitError):
    """The fitted parabola opens upward; no frequency maximum exists."""


class DegenerateDataError(FitError):
    """Input data are collinear/degenerate; the fit is rank-deficient."""


class ConfigError(CasimirMemsError, ValueError):
    """Configuration text could not be parsed or validated.

    Attributes
    ----------
    line : int or None
        1-based line number in the config source, when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line

    def __str__(self) -> str:
        base = super().__str__()
        return base if self.line is None else f"line {self.line}: {base}"


class ProximityWarning(UserWarning):
    """Gap is not small against the sphere radius; formulas lose accuracy."""
