"""Exception types raised across the package."""


class QuditReadoutError(Exception):
    """Base class for all package errors."""


class ConvergenceError(QuditReadoutError):
    """Charge-basis truncation is too small for the requested levels."""


class NoRootError(QuditReadoutError):
    """Bracketed root search has no sign change."""


class ResonanceError(QuditReadoutError):
    """A perturbative denominator is (nearly) zero."""


class DomainError(QuditReadoutError, ValueError):
    """Argument outside the domain of a formula."""


class DegenerateError(QuditReadoutError):
    """Two states share the same dispersive shift."""


class StepError(QuditReadoutError):
    """Too few integration steps for a stable fixed-step integration."""


class GeometryError(QuditReadoutError):
    """Cloud configuration violates the analytic-matrix preconditions."""


class SingularMatrixError(QuditReadoutError):
    """Assignment matrix cannot be inverted."""


class ResolutionError(QuditReadoutError):
    """Simplex grid too coarse to resolve the posterior."""


class ParseError(QuditReadoutError):
    """Malformed configuration text."""


class ValidationError(QuditReadoutError, ValueError):
    """Configuration value missing or invalid.

    ``field`` names the offending key.
    """

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or field)


class ESSWarning(UserWarning):
    """Importance sampling produced a small effective sample size."""


class ShortIntegrationWarning(UserWarning):
    """Measurement window too short for the steady-state limit."""
