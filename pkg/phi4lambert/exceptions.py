"""
Custom Exception Classes

Defines application-specific exceptions. Each top-level class maps to one
process exit status in exception_handlers.
"""

from typing import Any


class AppException(Exception):
    """
    Base exception for all application errors.

    All custom exceptions should inherit from this.
    """

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class ConfigError(AppException):
    """
    Raised when parameters or settings are invalid.

    Examples:
    - Missing CLI argument
    - Non-positive tolerance
    - Unknown identity id
    """

    pass


class DomainError(AppException):
    """
    Raised when an argument lies outside the domain of a function.

    Examples:
    - lambert_w_real(0, x) with x < -1/e
    - Coupling outside the holomorphicity region
    - G_alt called with a non-positive coupling
    """

    pass


class BoundaryError(DomainError):
    """
    Raised when a point falls inside the indeterminate band of a boundary.

    Examples:
    - lambda = -1/log 4 in in_omega_N
    - |lambda| on a branch threshold lambda_k(phi)
    """

    pass


class ConvergenceError(AppException):
    """
    Raised when an iterative method does not converge.

    Examples:
    - Halley iteration hit its iteration cap
    - Root bracket did not change sign
    """

    pass


class QuadratureError(ConvergenceError):
    """
    Raised when an integral cannot be evaluated to the requested accuracy.

    Examples:
    - Subdivision limit reached
    - Pole placed on an interval endpoint
    """

    pass


class DivergentTailError(QuadratureError):
    """
    Raised when a semi-infinite integrand does not decay.

    Examples:
    - hilbert_halfline of a function tending to a nonzero constant
    """

    pass


class FixedPointError(ConvergenceError):
    """
    Raised when the finite-cutoff fixed-point solver fails.

    Examples:
    - max_iter reached before tol
    - Grid values exceeding the divergence guard
    """

    pass


class VerificationError(AppException):
    """
    Raised when a numerical identity check exceeds its tolerance.

    Examples:
    - verify --suite all with one failing identity
    """

    pass
