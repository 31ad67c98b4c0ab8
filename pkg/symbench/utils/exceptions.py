# symbench/utils/exceptions.py

"""Custom exceptions for the symbench simulator.

This module defines the exception hierarchy used across the simulator, the
benchmarking engine and the command-line front end.
"""


class SymbenchError(Exception):
    """Base exception for all symbench errors."""

    pass


class ConfigurationError(SymbenchError):
    """Raised when a campaign configuration is unreadable or invalid."""

    pass


class InvalidParameterError(SymbenchError, ValueError):
    """Raised when invalid arguments are provided."""

    pass


class ValidationError(SymbenchError):
    """Raised when an object violates a physical invariant.

    Non-unitary gates, non-CPTP channels, invalid density matrices and
    interleaved gates that mix symmetry sectors all end up here.
    """

    pass


class CapabilityError(SymbenchError):
    """Raised when an exact computation is not available for the input."""

    pass


class FitConvergenceError(SymbenchError):
    """Raised when the decay fit does not converge.

    Attributes:
        residual_trace: Final residual norm of every optimiser start
    """

    def __init__(self, message: str, residual_trace: list[float] | None = None):
        super().__init__(message)
        self.residual_trace = list(residual_trace or [])


class ReportError(SymbenchError):
    """Raised when reading or writing a report file fails."""

    pass
