# symbench/utils/logging.py

"""Structured logging configuration using structlog.

Console rendering is meant for interactive runs, JSON rendering for campaign
logs that are archived next to the reports. Campaign identifiers bound with
:func:`bind_context` are attached to every event emitted while the campaign
runs, including events from worker threads started by the engine.
"""

import logging
import sys
from typing import Any

import structlog
from pythonjsonlogger import jsonlogger
from structlog.types import FilteringBoundLogger, Processor

from symbench.config import LoggingConfig

# Context keys forwarded into every event when include_context is enabled
CAMPAIGN_CONTEXT_KEYS = ("campaign_id", "kind", "master_seed", "sector")


def add_campaign_context(
    logger: FilteringBoundLogger, method_name: str, event_dict: dict[str, Any]
) -> dict[str, Any]:
    """Add bound campaign identifiers to log entries.

    Args:
        logger: The bound logger instance
        method_name: The name of the method being called
        event_dict: The event dictionary

    Returns:
        Updated event dictionary with campaign context
    """
    context = structlog.contextvars.get_contextvars()
    for key in CAMPAIGN_CONTEXT_KEYS:
        if key in context:
            event_dict.setdefault(key, context[key])
    return event_dict


def add_service_context(
    logger: FilteringBoundLogger, method_name: str, event_dict: dict[str, Any]
) -> dict[str, Any]:
    """Add service context information to logs."""
    from symbench import __version__

    event_dict.setdefault("service", "symbench")
    event_dict.setdefault("version", __version__)
    return event_dict


def setup_logging(config: LoggingConfig | None = None) -> None:
    """Configure structured logging for the application.

    Args:
        config: Logging configuration. If None, uses default config.

    Example:
        >>> from symbench.utils.logging import setup_logging
        >>> setup_logging()
        >>> log = structlog.get_logger()
        >>> log.info("campaign_started", kind="number")
    """
    if config is None:
        from symbench.config import get_config

        config = get_config().logging

    level = getattr(logging, config.level)

    # Third-party libraries stay quiet unless they hit an error
    logging.root.handlers.clear()
    logging.basicConfig(format="%(message)s", level=logging.ERROR, handlers=[])

    if config.output in ("file", "both"):
        config.log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(config.log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(jsonlogger.JsonFormatter("%(message)s %(levelname)s %(name)s"))
        logging.root.addHandler(file_handler)

    processors: list[Processor] = []
    if config.include_context:
        processors.append(add_campaign_context)
    processors.append(add_service_context)
    processors.append(structlog.stdlib.add_log_level)

    if config.include_timestamp:
        processors.append(structlog.processors.TimeStamper(fmt="iso"))

    if config.include_caller:
        processors.append(structlog.processors.CallsiteParameterAdder())

    processors.append(structlog.processors.StackInfoRenderer())
    processors.append(structlog.processors.ExceptionRenderer())

    if config.output in ("file", "both"):
        # Records go through the stdlib handler which formats them as JSON
        processors.append(structlog.processors.JSONRenderer())
        logger_factory: Any = structlog.stdlib.LoggerFactory()
        if config.output == "both":
            logging.root.addHandler(logging.StreamHandler(sys.stderr))
        logging.root.setLevel(level)
    else:
        if config.format == "json":
            processors.append(structlog.processors.JSONRenderer())
        else:
            processors.append(structlog.dev.ConsoleRenderer(colors=False))
        stream = sys.stdout if config.output == "stdout" else sys.stderr
        logger_factory = structlog.PrintLoggerFactory(file=stream)

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=logger_factory,
        cache_logger_on_first_use=False,
    )


def get_logger(name: str | None = None) -> FilteringBoundLogger:
    """Get a configured logger instance.

    Args:
        name: Logger name. If None, uses calling module name.

    Returns:
        Configured structlog logger

    Example:
        >>> log = get_logger(__name__)
        >>> log.info("curve_estimated", lengths=9)
    """
    return structlog.get_logger(name)


def bind_context(**kwargs: Any) -> None:
    """Bind context variables that will be included in all subsequent log entries.

    Example:
        >>> bind_context(campaign_id="number_n4", master_seed=42)
    """
    structlog.contextvars.bind_contextvars(**kwargs)


def unbind_context(*keys: str) -> None:
    """Unbind context variables.

    Example:
        >>> unbind_context("campaign_id")
    """
    structlog.contextvars.unbind_contextvars(*keys)


def clear_context() -> None:
    """Clear all context variables."""
    structlog.contextvars.clear_contextvars()


class LoggerMixin:
    """Mixin class to add logging capabilities to any class.

    Example:
        >>> class MyRunner(LoggerMixin):
        ...     def run(self):
        ...         self.log.info("running", step=1)
    """

    @property
    def log(self) -> FilteringBoundLogger:
        """Get logger bound to this class."""
        if not hasattr(self, "_log"):
            self._log = get_logger(self.__class__.__name__)
        return self._log
