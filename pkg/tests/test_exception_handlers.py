import io
import json

import pytest
from pydantic import ValidationError

from phi4lambert.exception_handlers import (
    EXIT_CONFIG,
    EXIT_CONVERGENCE,
    EXIT_DOMAIN,
    EXIT_VERIFY_FAILED,
    app_exception_handler,
)
from phi4lambert.exceptions import (
    BoundaryError,
    ConfigError,
    DivergentTailError,
    DomainError,
    FixedPointError,
    QuadratureError,
    VerificationError,
)
from phi4lambert.schemas import QuadSpec


@pytest.mark.parametrize(
    "exc, code",
    [
        (ConfigError("bad"), EXIT_CONFIG),
        (DomainError("outside"), EXIT_DOMAIN),
        (BoundaryError("on the edge"), EXIT_DOMAIN),
        (QuadratureError("no"), EXIT_CONVERGENCE),
        (DivergentTailError("no decay"), EXIT_CONVERGENCE),
        (FixedPointError("stuck"), EXIT_CONVERGENCE),
        (VerificationError("off"), EXIT_VERIFY_FAILED),
        (RuntimeError("boom"), EXIT_VERIFY_FAILED),
    ],
)
def test_exit_codes(exc, code):
    assert app_exception_handler(exc, io.StringIO()) == code


def test_error_record():
    stream = io.StringIO()
    app_exception_handler(DomainError("lambda outside", details={"lambda": -0.8}), stream)
    record = json.loads(stream.getvalue())
    assert record == {
        "schema": "phi4-lambert/1",
        "error": "DomainError",
        "message": "lambda outside",
        "details": {"lambda": -0.8},
    }


def test_validation_error_is_config_error():
    stream = io.StringIO()
    with pytest.raises(ValidationError) as info:
        QuadSpec(abs_tol=-1.0)
    assert app_exception_handler(info.value, stream) == EXIT_CONFIG
    assert json.loads(stream.getvalue())["error"] == "ConfigError"
