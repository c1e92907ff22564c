"""
Closed-Form Service

The exact solution of the 2-point equation: the Lambert factors K and L,
their combination I_lambda, the angle function tau, the integral N and the
2-point function G in its three representations.

Everything real is vectorized over the momentum arguments; complex
couplings go through K_complex, whose branch comes from the domain maps.
"""

import cmath
import math
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from phi4lambert.config import get_settings
from phi4lambert.exceptions import BoundaryError, ConvergenceError, DomainError, QuadratureError
from phi4lambert.logger import get_logger
from phi4lambert.schemas import EvalPoint, GValue, QuadSpec, as_number, to_number
from phi4lambert.services.domains import branch_index_lambda, branch_index_z, in_omega_N
from phi4lambert.services.quadrature import (
    ERROR_SLACK,
    gauss_legendre_rule,
    halfline_rule,
    hilbert_halfline,
    integrate,
)
from phi4lambert.services.special import (
    arctan_branch,
    lambert_w0_exp,
    lambert_w0_series,
    lambert_w_complex,
    lambert_w_real,
    lambert_wm1_negexp,
)

logger = get_logger(__name__)

# exp() of larger real parts overflows; W is then found from w + log w = y
EXP_LIMIT = 600.0


def _scalar_or_array(value: NDArray, scalar: bool) -> float | NDArray:
    return float(value) if scalar else value


def _check_lambda(lam: float) -> float:
    if isinstance(lam, complex) or not math.isfinite(lam):
        raise DomainError("coupling must be a finite real number here", details={"lambda": str(lam)})
    return float(lam)


# ---------------------------------------------------------------------------
# Lambert factors
# ---------------------------------------------------------------------------


def _shifted_factor(a: ArrayLike, lam: float) -> NDArray[np.float64]:
    """
    D = a + K(a, lambda), the root of D - a + lambda log(1 + D) = 0 on the
    branch continuous in lambda from D = a at lambda = 0.
    """
    aa = np.asarray(a, dtype=float)
    if np.any(~np.isfinite(aa)):
        raise DomainError("momentum arguments must be finite")
    if lam == 0:
        return aa.astype(float, copy=True)

    if lam > 0:
        x = lam * np.asarray(lambert_w0_exp((1.0 + aa) / lam - math.log(lam)))
    else:
        if np.any(lam <= -1.0 - aa):
            raise DomainError(
                "the W_-1 continuation needs lambda > -1-a",
                details={"lambda": lam, "min_a": float(np.min(aa))},
            )
        s = -lam
        x = lam * np.asarray(lambert_wm1_negexp((1.0 + aa) / s + math.log(s)))

    d = x - 1.0
    for _ in range(2):
        d = d - (d - aa + lam * np.log1p(d)) / (1.0 + lam / (1.0 + d))
    # D = 0 is the exact root at a = 0
    return np.where(aa == 0, 0.0, d)


def lambert_factor(a: ArrayLike, lam: float) -> float | NDArray[np.float64]:
    """
    lambda W((1/lambda) e^{(1+a)/lambda}) = 1 + a + K(a, lambda).

    W_0 for lambda > 0 and W_-1 for -1-a < lambda < 0; at lambda = 0 the
    limit 1 + a. The exponential is never formed.
    """
    lam = _check_lambda(lam)
    return _scalar_or_array(1.0 + _shifted_factor(a, lam), np.ndim(a) == 0)


def K(a: ArrayLike, lam: float) -> float | NDArray[np.float64]:
    """
    K(a, lambda) = lambda W((1/lambda) e^{(1+a)/lambda}) - 1 - a.

    Solves K = -lambda log(1 + a + K). Returned as -lambda log(1 + a + K)
    so small couplings keep full relative accuracy.

    Raises:
        DomainError: If a < 0 or lambda <= -1
    """
    lam = _check_lambda(lam)
    aa = np.asarray(a, dtype=float)
    if np.any(aa < 0):
        raise DomainError("K requires a >= 0", details={"min_a": float(np.min(aa))})
    if lam <= -1.0:
        raise DomainError("K requires lambda > -1", details={"lambda": lam})
    value = -lam * np.log1p(_shifted_factor(aa, lam))
    return _scalar_or_array(value, np.ndim(a) == 0)


def L(a: ArrayLike, lam: float) -> float | NDArray[np.float64]:
    """L(a, lambda) = log((a + K)/a), with the a -> 0 limit -log(1 + lambda)."""
    lam = _check_lambda(lam)
    aa = np.asarray(a, dtype=float)
    if np.any(aa < 0):
        raise DomainError("L requires a >= 0", details={"min_a": float(np.min(aa))})
    if lam <= -1.0:
        raise DomainError("L requires lambda > -1", details={"lambda": lam})
    d = _shifted_factor(aa, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(aa > 0, np.log(d / np.where(aa > 0, aa, 1.0)), -math.log1p(lam))
    return _scalar_or_array(value, np.ndim(a) == 0)


def I_lambda(a: ArrayLike, lam: float) -> float | NDArray[np.float64]:
    """The resummed one-point integral K - lambda L."""
    k = np.asarray(K(a, lam))
    value = k - lam * np.asarray(L(a, lam))
    return _scalar_or_array(value, np.ndim(a) == 0)


def L_integral(a: float, lam: float, spec: QuadSpec | None = None) -> float:
    """
    L as the flow integral -int_0^lambda dt/t / (1 + W_0(e^{1/t + a/lambda}/t)).

    Only for lambda > 0, where the characteristic curves stay real.
    """
    lam = _check_lambda(lam)
    if lam <= 0:
        raise DomainError("L_integral requires lambda > 0", details={"lambda": lam})
    if a < 0:
        raise DomainError("L_integral requires a >= 0", details={"a": a})

    shift = a / lam

    def flow(t: float) -> float:
        if t == 0:
            return 1.0
        w = float(lambert_w0_exp(1.0 / t + shift - math.log(t)))
        return 1.0 / (t * (1.0 + w))

    return -integrate(flow, 0.0, lam, spec).number.real


def _lambert_w_exp(k: int, y: complex) -> complex:
    """W_k(e^y), through w + log w = y + 2 pi i k once e^y leaves double range."""
    if abs(y.real) <= EXP_LIMIT or (k == 0 and y.real < 0):
        return complex(lambert_w_complex(k, cmath.exp(y)))

    im = y.imag - 2 * math.pi * round(y.imag / (2 * math.pi))
    if im <= -math.pi:
        im += 2 * math.pi
    target = complex(y.real, im) + 2j * math.pi * k
    w = target - cmath.log(target)
    for _ in range(get_settings().lambert_max_iter):
        dw = (w + cmath.log(w) - target) / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 1e-15 * abs(w):
            return w
    raise ConvergenceError("W_k(e^y) Newton iteration did not converge", details={"k": k, "y": str(y)})


def K_complex(z: complex | float, lam: complex | float) -> complex:
    """
    K continued to complex z or complex lambda (one of the two).

    On the real patch (z >= 0, lambda > -1) this is the real K. Elsewhere
    K = lambda W_k(e^y) - 1 - z with y = (1+z)/lambda - log lambda, where
    the branch k comes from branch_index_lambda for complex lambda and
    from branch_index_z for complex z. Crossing a cochleoid boundary
    changes k, so the result stays on the sheet continued from the
    real patch and satisfies K = -lambda Log(1 + z + K) with the
    principal logarithm. The functional equation is checked before
    returning.

    Usage:
        K_complex(1.0, 0.5 + 0.2j)

    Raises:
        DomainError: If both arguments are complex, or z/lambda sits on a cut
        BoundaryError: If lambda lies on a branch threshold
        ConvergenceError: If the functional equation is not met
    """
    z, lam = complex(z), complex(lam)
    if z.imag != 0 and lam.imag != 0:
        raise DomainError(
            "K_complex supports complex z or complex lambda, not both",
            details={"z": str(z), "lambda": str(lam)},
        )
    if lam == 0:
        return 0j
    if lam.imag == 0 and z.imag == 0 and z.real >= 0 and lam.real > -1.0:
        return complex(K(z.real, lam.real))

    if lam.imag != 0:
        if z.real < 0:
            raise DomainError("complex lambda requires a real a >= 0", details={"a": z.real})
        k = branch_index_lambda(z.real, lam)
    else:
        k = branch_index_z(z, lam.real)

    y = (1.0 + z) / lam - cmath.log(lam)
    x = lam * _lambert_w_exp(k, y)
    if x == 0:
        raise DomainError("Lambert factor underflows", details={"z": str(z), "lambda": str(lam)})
    value = x - 1.0 - z

    residual = abs(value + lam * cmath.log(x))
    if residual > 1e-9 * (1.0 + abs(x)):
        raise ConvergenceError(
            "K_complex violates its functional equation",
            details={"z": str(z), "lambda": str(lam), "branch": k, "residual": residual},
        )
    logger.debug(f"K_complex(z={z}, lambda={lam}) on branch {k}")
    return value


def strong_coupling_K(a: float, lam: float, terms: int = 40) -> float:
    """
    K from the power series of W_0, valid at strong coupling
    lambda > (1+a)/W_0((1+a)/e).
    """
    lam = _check_lambda(lam)
    threshold = (1.0 + a) / float(lambert_w_real(0, (1.0 + a) / math.e))
    if lam <= threshold:
        raise DomainError(
            "strong-coupling series needs lambda > (1+a)/W_0((1+a)/e)",
            details={"a": a, "lambda": lam, "threshold": threshold},
        )
    z = math.exp((1.0 + a) / lam) / lam
    return lam * float(lambert_w0_series(z, terms).real) - 1.0 - a


# ---------------------------------------------------------------------------
# Angle function and consistency relations
# ---------------------------------------------------------------------------


def tau(a: float, p: ArrayLike, lam: float) -> float | NDArray[np.float64]:
    """
    tau_a(p) = arctan(lambda pi / (a + 1 + u - lambda log u)), u = p + K(p, lambda).

    The angle is taken in [0, pi] for lambda > 0 and in [-pi, 0] for
    lambda < 0. At p = 0 (u = 0) it takes its limit 0, resp. -pi.
    """
    lam = _check_lambda(lam)
    pp = np.asarray(p, dtype=float)
    if np.any(pp < 0) or a < 0:
        raise DomainError("tau requires a, p >= 0", details={"a": a})
    if lam == 0:
        return _scalar_or_array(np.zeros_like(pp), np.ndim(p) == 0)

    u = _shifted_factor(pp, lam)
    endpoint = u <= 0
    safe_u = np.where(endpoint, 1.0, u)
    den = a + 1.0 + safe_u - lam * np.log(safe_u)
    angle = np.asarray(arctan_branch(lam * math.pi, den))
    angle = np.where(endpoint, 0.0 if lam > 0 else -math.pi, angle)
    return _scalar_or_array(angle, np.ndim(p) == 0)


def cot_tau_residual(a: float, b: float, lam: float) -> tuple[float, float]:
    """
    Residuals of cot tau_b(a) = (1+a+b - lambda log a + I_lambda(a))/(lambda pi)
    and of the shift rule cot tau_b(a) - cot tau_0(a) = b/(lambda pi).
    """
    if a <= 0 or lam == 0:
        raise DomainError("cot_tau_residual requires a > 0 and lambda != 0", details={"a": a, "lambda": lam})
    cot_b = 1.0 / math.tan(float(tau(b, a, lam)))
    cot_0 = 1.0 / math.tan(float(tau(0.0, a, lam)))
    expected = (1.0 + a + b - lam * math.log(a) + float(I_lambda(a, lam))) / (lam * math.pi)
    return cot_b - expected, cot_b - cot_0 - b / (lam * math.pi)


def pde_residuals(a: float, lam: float, h: float = 1e-4) -> tuple[float, float]:
    """
    Residuals of the first-order system solved by K and L, by central differences:

        (1+a+lambda) dK/da + lambda dK/dlambda - K + lambda = 0
        a dL/da + lambda dL/dlambda - dK/da = 0
    """
    if a <= h:
        raise DomainError("pde_residuals needs a > h", details={"a": a, "h": h})

    def diff(f: Callable[[float, float], float | NDArray], da: float, dl: float) -> float:
        return (float(f(a + da, lam + dl)) - float(f(a - da, lam - dl))) / (2 * h)

    k_a, k_l = diff(K, h, 0.0), diff(K, 0.0, h)
    l_a, l_l = diff(L, h, 0.0), diff(L, 0.0, h)
    first = (1.0 + a + lam) * k_a + lam * k_l - float(K(a, lam)) + lam
    second = a * l_a + lam * l_l - k_a
    return first, second


# ---------------------------------------------------------------------------
# The integral N and the 2-point function G
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _n_rule(cutoff: float, order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    return halfline_rule(cutoff, order, start=1e-6, ratio=2.0)


def _log_a(a: NDArray[np.float64], t: NDArray[np.float64], lam: complex) -> NDArray[np.complex128]:
    """log(1 - lambda log(1/2 - it)/(a + 1/2 + it)), rows a, columns t."""
    return np.log(1.0 - lam * np.log(0.5 - 1j * t[None, :]) / (a[:, None] + 0.5 + 1j * t[None, :]))


def _dlog_b(b: NDArray[np.float64], t: NDArray[np.float64], lam: complex) -> NDArray[np.complex128]:
    """d/dt log(1 - lambda log(1/2 + it)/(b + 1/2 - it)), rows b, columns t."""
    q = 0.5 + 1j * t[None, :]
    r = b[:, None] + 0.5 - 1j * t[None, :]
    log_q = np.log(q)
    value = 1.0 - lam * log_q / r
    slope = -lam * (1j / (q * r) + 1j * log_q / r**2)
    return slope / value


def _n_outer(
    a: NDArray[np.float64], b: NDArray[np.float64], lam: complex, order: int, cutoff: float
) -> tuple[NDArray, NDArray[np.float64]]:
    """N on the outer grid a x b with one matrix product, and the tail estimate."""
    t, w = _n_rule(cutoff, order)
    edge = np.array([cutoff])
    log_t = math.log(cutoff)
    tail_model = cutoff / 2.0 * (1.0 + 1.0 / log_t + 0.5 / log_t**2)

    if lam.imag == 0:
        lam_r = lam.real
        body = (_log_a(a, t, lam_r) * w[None, :]) @ _dlog_b(b, t, lam_r).T
        edge_value = np.outer(_log_a(a, edge, lam_r)[:, 0], _dlog_b(b, edge, lam_r)[:, 0])
        tail = edge_value.imag / math.pi * tail_model
        return body.imag / math.pi + tail, np.abs(tail)

    t_full = np.concatenate((-t[::-1], t))
    w_full = np.concatenate((w[::-1], w))
    body = (_log_a(a, t_full, lam) * w_full[None, :]) @ _dlog_b(b, t_full, lam).T / (2j * math.pi)
    ends = np.array([-cutoff, cutoff])
    edge_value = (_log_a(a, ends, lam) @ _dlog_b(b, ends, lam).T) / (2j * math.pi)
    tail = edge_value * tail_model
    return body + tail, np.abs(tail)


def n_integral(a: ArrayLike, b: ArrayLike, lam: complex | float) -> tuple[NDArray | complex | float, NDArray | float]:
    """
    N_lambda(a, b) with its error estimate, broadcasting a against b.

    The t-integral is a fixed composite Gauss-Legendre rule on geometric
    panels over [0, T] (mirrored for complex lambda) plus a tail model
    for the log^2 t / t^3 decay. Distinct a and b values are evaluated on
    their outer grid in one matrix product. The error estimate compares
    16 and 24 nodes per panel and adds a share of the tail.

    Raises:
        DomainError: If lambda is outside Omega_N, or a, b are negative
        BoundaryError: If lambda is within the boundary band of the envelope
    """
    lam_c = complex(lam)
    verdict = in_omega_N(lam_c)
    if verdict.indeterminate:
        raise BoundaryError(
            "lambda lies on the boundary of the domain of N",
            details={"lambda": str(lam_c), "distance": verdict.distance_estimate},
        )
    if not verdict.inside:
        raise DomainError("lambda lies outside the domain of N", details={"lambda": str(lam_c)})

    aa, bb = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if np.any(aa < 0) or np.any(bb < 0) or not (np.all(np.isfinite(aa)) and np.all(np.isfinite(bb))):
        raise DomainError("N requires finite a, b >= 0")
    scalar = aa.ndim == 0
    real = lam_c.imag == 0

    if lam_c == 0:
        zero = np.zeros(aa.shape)
        return (0.0, 0.0) if scalar else (zero, zero)

    a_unique, a_index = np.unique(aa, return_inverse=True)
    b_unique, b_index = np.unique(bb, return_inverse=True)
    cutoff = get_settings().n_truncation

    coarse, tail = _n_outer(a_unique, b_unique, lam_c, 16, cutoff)
    fine, _ = _n_outer(a_unique, b_unique, lam_c, 24, cutoff)
    err = np.abs(fine - coarse) + tail / math.log(cutoff)

    a_index, b_index = a_index.reshape(aa.shape), b_index.reshape(bb.shape)
    value, err = fine[a_index, b_index], err[a_index, b_index]
    logger.debug(f"N over {a_unique.size}x{b_unique.size} momenta at lambda={lam_c}")
    if scalar:
        number = value.item()
        return (float(number.real) if real else complex(number)), float(err)
    return (value.real if real else value), err


def N(a: ArrayLike, b: ArrayLike, lam: complex | float) -> NDArray | complex | float:
    """N_lambda(a, b); symmetric in (a, b) and zero at lambda = 0."""
    return n_integral(a, b, lam)[0]


def _factors(a: NDArray, b: NDArray, lam: complex) -> tuple[NDArray, NDArray]:
    """(a + lambda W(...(1+b)), b + lambda W(...(1+a))) elementwise."""
    if lam.imag == 0:
        return a + 1.0 + _shifted_factor(b, lam.real), b + 1.0 + _shifted_factor(a, lam.real)

    cache: dict[float, complex] = {}

    def factor(x: float) -> complex:
        if x not in cache:
            cache[x] = 1.0 + x + K_complex(x, lam)
        return cache[x]

    vectorized = np.vectorize(factor, otypes=[complex])
    return a + vectorized(b), b + vectorized(a)


def G_array(
    a: ArrayLike, b: ArrayLike, lam: complex | float
) -> tuple[NDArray | complex | float, NDArray | complex | float, NDArray | float]:
    """
    G_lambda(a, b) = (1+a+b) e^{N_lambda(a,b)} / (factor_a factor_b), broadcasting.

    Returns:
        (g, n_value, err_estimate); scalars for scalar a and b
    """
    lam_c = complex(lam)
    n_value, n_err = n_integral(a, b, lam_c)
    aa, bb = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    factor_a, factor_b = _factors(aa, bb, lam_c)
    g = (1.0 + aa + bb) * np.exp(np.asarray(n_value)) / (factor_a * factor_b)
    err = np.abs(g) * np.asarray(n_err)
    if aa.ndim == 0:
        g_item = g.item()
        return (g_item.real if lam_c.imag == 0 else complex(g_item)), n_value, float(err)
    return (g.real if lam_c.imag == 0 else g), n_value, err


def G(point: EvalPoint) -> GValue:
    """
    Closed-form G at one point.

    G is assembled as (1+a+b) e^N / (factor_a factor_b). The Lambert factors
    carry the one-variable part and N is a single quadrature in t, so
    err_estimate is the quadrature error of N propagated through the
    exponential. For real lambda all fields are real; a complex lambda
    gives complex G, N and factors.

    Raises:
        DomainError: If lambda is outside Omega_N, or a, b are negative
        BoundaryError: If lambda is within the boundary band of the envelope
    """
    lam = complex(as_number(point.lam))
    g, n_value, err = G_array(point.a, point.b, lam)
    factor_a, factor_b = _factors(np.asarray(point.a), np.asarray(point.b), lam)
    if lam.imag == 0:
        factor_a, factor_b = factor_a.real, factor_b.real
    return GValue(
        g=to_number(complex(g) if lam.imag else float(g)),  # type: ignore[arg-type]
        n_value=to_number(n_value),  # type: ignore[arg-type]
        err_estimate=float(err),
        factor_a=to_number(factor_a.item()),
        factor_b=to_number(factor_b.item()),
    )


def G_hilbert(a: float, b: float, lam: float, spec: QuadSpec | None = None) -> float:
    """
    G through the Hilbert transform of the angle function:

        G = exp(H_b[tau_a]) / sqrt((lambda pi)^2 + (a + 1 + u_b - lambda log u_b)^2)

    At b = 0 the transform and the denominator both diverge, so the
    symmetric order (b, a) is used.
    """
    lam = _check_lambda(lam)
    if lam <= 0:
        raise DomainError("G_hilbert requires lambda > 0", details={"lambda": lam})
    if a < 0 or b < 0:
        raise DomainError("G_hilbert requires a, b >= 0", details={"a": a, "b": b})
    if b == 0:
        if a == 0:
            raise DomainError("G_hilbert is degenerate at a = b = 0; use G")
        a, b = b, a

    transform = hilbert_halfline(lambda p: float(tau(a, p, lam)), b, spec)
    u_b = float(_shifted_factor(b, lam))
    den = a + 1.0 + u_b - lam * math.log(u_b)
    return math.exp(transform) / math.hypot(lam * math.pi, den)


def _alt_exponent(a: float, b: float, lam: float, order: int) -> float:
    # u = e^s, s in [-36, 18]; the arctan kernels vanish like 1/|log u| at 0
    s, w = gauss_legendre_rule(np.arange(-36.0, 19.0), order)
    u = np.exp(s)
    jac = w * u

    def kernel(x: float) -> NDArray[np.float64]:
        return np.asarray(arctan_branch(lam * math.pi, 1.0 + x + u - lam * np.log(u)))

    weight_a, weight_b = kernel(a) * jac, kernel(b) * jac
    mixed = 1.0 / (1.0 + u[:, None] + u[None, :]) ** 2
    return float(weight_a @ mixed @ weight_b) / math.pi**2


def G_alt(a: float, b: float, lam: float, spec: QuadSpec | None = None) -> float:
    """
    G from the real, manifestly symmetric double integral

        exp(-(1/pi^2) int int T_a(v) T_b(u) / (1+u+v)^2 du dv) / (X_a + X_b - 1)

    with T_x(v) = arctan(lambda pi/(1 + x + v - lambda log v)) and X the
    Lambert factors. Holds for lambda > 0 only.

    Raises:
        DomainError: If lambda <= 0
        QuadratureError: If 16 and 24 node tensor rules disagree beyond tolerance
    """
    lam = _check_lambda(lam)
    if lam <= 0:
        raise DomainError("G_alt holds for lambda > 0 only", details={"lambda": lam})
    if a < 0 or b < 0:
        raise DomainError("G_alt requires a, b >= 0", details={"a": a, "b": b})
    spec = spec or QuadSpec.from_settings()

    coarse = _alt_exponent(a, b, lam, 16)
    fine = _alt_exponent(a, b, lam, 24)
    denominator = float(lambert_factor(a, lam)) + float(lambert_factor(b, lam)) - 1.0
    value = math.exp(-fine) / denominator

    target = max(spec.abs_tol, spec.rel_tol * abs(fine))
    if abs(fine - coarse) > ERROR_SLACK * target:
        raise QuadratureError(
            "G_alt tensor rule not converged",
            details={"a": a, "b": b, "lambda": lam, "difference": abs(fine - coarse)},
        )
    return value
