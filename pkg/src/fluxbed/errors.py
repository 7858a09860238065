"""Exception hierarchy shared across the toolkit.

Validation errors signal bad inputs or violated preconditions (CLI exit
code 1); numerical errors signal a solver or fit that failed to converge
(CLI exit code 2).
"""


class FluxbedError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(FluxbedError, ValueError):
    """Bad input: dimension mismatch, out-of-range parameter, unknown label."""


class NumericalError(FluxbedError, RuntimeError):
    """A numerical procedure failed: non-convergence, step underflow."""

    def __init__(self, message: str, diagnostic: dict | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class CalibrationInsufficientError(ValidationError):
    """Too few detected centers (or too few visible periods) to calibrate."""
