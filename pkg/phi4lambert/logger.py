"""
Logging Configuration

Log records go to stderr; stdout is reserved for the artifact a command
emits. Records raised with extra={"details": {...}} get the details
appended as key=value pairs.
"""

import logging
import sys

from phi4lambert.config import get_settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class DetailsFormatter(logging.Formatter):
    """Formatter that renders an optional `details` mapping after the message."""

    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        details = getattr(record, "details", None)
        if details:
            line += " [" + ", ".join(f"{k}={details[k]}" for k in sorted(details)) + "]"
        return line


def setup_logging(level: str | None = None) -> None:
    """
    Configure the root logger once per process.

    The level comes from LOG_LEVEL unless given explicitly. Does nothing when
    the root logger already has handlers.
    """
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(DetailsFormatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    logging.basicConfig(level=level or get_settings().log_level, handlers=[handler])


def get_logger(name: str) -> logging.Logger:
    """Usage: logger = get_logger(__name__)"""
    return logging.getLogger(name)
