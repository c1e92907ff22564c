"""
Exception Handlers for the CLI

Converts exceptions into exit statuses and JSON error records on stderr.
"""

import json
import sys
from typing import Any, TextIO

from pydantic import ValidationError

from phi4lambert.exceptions import (
    AppException,
    ConfigError,
    ConvergenceError,
    DomainError,
    VerificationError,
)
from phi4lambert.logger import get_logger
from phi4lambert.services.formatting import SCHEMA_VERSION, to_jsonable

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4


def app_exception_handler(exc: Exception, stream: TextIO | None = None) -> int:
    """
    Handle all custom AppException errors.

    Writes a JSON error record and returns the exit status.
    """
    if isinstance(exc, ValidationError):
        return validation_exception_handler(exc, stream)
    if not isinstance(exc, AppException):
        return generic_exception_handler(exc, stream)

    logger.error(
        f"{exc.__class__.__name__}: {exc.message}",
        extra={"details": exc.details},
    )

    # Map exception types to exit statuses
    exit_code = EXIT_VERIFY_FAILED
    if isinstance(exc, ConfigError):
        exit_code = EXIT_CONFIG
    elif isinstance(exc, DomainError):
        exit_code = EXIT_DOMAIN
    elif isinstance(exc, ConvergenceError):
        exit_code = EXIT_CONVERGENCE
    elif isinstance(exc, VerificationError):
        exit_code = EXIT_VERIFY_FAILED

    _write_record(exc.__class__.__name__, exc.message, exc.details, stream)
    return exit_code


def validation_exception_handler(exc: ValidationError, stream: TextIO | None = None) -> int:
    """
    Handle pydantic validation errors raised while building configs.

    These are configuration errors: a parameter had the wrong type or range.
    """
    logger.error(f"Invalid parameters: {exc.error_count()} error(s)")
    details = {"errors": [f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors()]}
    _write_record("ConfigError", "Invalid parameters", details, stream)
    return EXIT_CONFIG


def generic_exception_handler(exc: Exception, stream: TextIO | None = None) -> int:
    """
    Handle unexpected exceptions.

    Catches any exception that wasn't specifically handled.
    """
    logger.error(f"Unhandled exception: {str(exc)}", exc_info=True)
    _write_record("InternalError", "An unexpected error occurred", {}, stream)
    return EXIT_VERIFY_FAILED


def _write_record(error: str, message: str, details: dict[str, Any], stream: TextIO | None) -> None:
    record = {
        "schema": SCHEMA_VERSION,
        "error": error,
        "message": message,
        "details": to_jsonable(details),
    }
    out = stream if stream is not None else sys.stderr
    out.write(json.dumps(record, sort_keys=True) + "\n")
