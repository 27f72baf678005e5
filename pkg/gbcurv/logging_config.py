"""
Logging configuration for gbcurv.

Sets up logging based on environment variables:
- GBCURV_DEBUG=1 (or DEBUG=1): Enable DEBUG level logging
- GBCURV_LOG_LEVEL=<name>: Explicit level name (WARNING, ERROR, ...)
- Otherwise: INFO level logging (default)

Log records go to stderr so that JSON reports written to stdout stay parseable.
"""

import logging
import os
import sys

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def debug_enabled() -> bool:
    """Return True when debug logging was requested through the environment."""
    return os.getenv("GBCURV_DEBUG") == "1" or os.getenv("DEBUG") == "1"


def resolve_log_level() -> int:
    """
    Resolve the logging level from the environment.

    Returns:
        A logging level constant

    Raises:
        ValueError: If GBCURV_LOG_LEVEL names an unknown level
    """
    if debug_enabled():
        return logging.DEBUG

    level_name = os.getenv("GBCURV_LOG_LEVEL", "INFO").strip().upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        raise ValueError(
            f"Unknown GBCURV_LOG_LEVEL '{level_name}'. "
            "Use one of DEBUG, INFO, WARNING, ERROR, CRITICAL."
        )
    return level


def get_logger(name: str) -> logging.Logger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    log_level = resolve_log_level()
    logger.setLevel(log_level)

    # Create stderr handler if not already present
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(log_level)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False

    return logger
