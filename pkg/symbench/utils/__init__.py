# symbench/utils/__init__.py

"""Utility modules for symbench.

Report writers live in :mod:`symbench.utils.reports`; they depend on the core
curve types and are imported from there directly.
"""

from symbench.utils.exceptions import (
    CapabilityError,
    ConfigurationError,
    FitConvergenceError,
    InvalidParameterError,
    ReportError,
    SymbenchError,
    ValidationError,
)
from symbench.utils.logging import (
    LoggerMixin,
    bind_context,
    clear_context,
    get_logger,
    setup_logging,
    unbind_context,
)

__all__ = [
    # Exceptions
    "SymbenchError",
    "ConfigurationError",
    "InvalidParameterError",
    "ValidationError",
    "CapabilityError",
    "FitConvergenceError",
    "ReportError",
    # Logging
    "setup_logging",
    "get_logger",
    "bind_context",
    "unbind_context",
    "clear_context",
    "LoggerMixin",
]
