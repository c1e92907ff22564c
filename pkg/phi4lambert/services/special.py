"""
Special Functions Service

Branch-complete Lambert W, the dilogarithm and Nielsen generalized
polylogarithms. Everything else in the package is built on these.

Lambert W follows the usual branch conventions: W_k is holomorphic off
(-inf, 0] for k != 0 and off (-inf, -1/e] for k = 0, with counter-clockwise
continuity on the cuts. W_0 and W_-1 are the only branches with real values.
Points exactly on a cut are resolved by a side flag: +1 takes the limit
from above (z + i0), -1 from below (z - i0).
"""

import math
from typing import overload

import mpmath
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import hyp2f1

from phi4lambert.config import get_settings
from phi4lambert.exceptions import ConfigError, ConvergenceError, DomainError, QuadratureError
from phi4lambert.logger import get_logger
from phi4lambert.schemas import QuadSpec
from phi4lambert.services.quadrature import integrate

logger = get_logger(__name__)

EXP_M1 = math.exp(-1.0)
BRANCH_POINT = -EXP_M1
ZETA2 = math.pi**2 / 6.0


# ---------------------------------------------------------------------------
# Lambert W: complex branches
# ---------------------------------------------------------------------------


@overload
def lambert_w_complex(k: int, z: complex, side: int = 1) -> complex: ...
@overload
def lambert_w_complex(k: int, z: NDArray[np.complex128], side: int = 1) -> NDArray[np.complex128]: ...


def lambert_w_complex(k: int, z: ArrayLike, side: int = 1) -> complex | NDArray[np.complex128]:
    """
    Evaluate the k-th branch W_k(z) of the Lambert function.

    Args:
        k: Branch index (any integer)
        z: Complex scalar or array
        side: +1 or -1, which side of the branch cut to use for z on the cut

    Returns:
        w with w*exp(w) = z, same shape as z

    Raises:
        DomainError: If z = 0 on a branch k != 0
        ConvergenceError: If Halley's iteration does not settle

    How it works:
    1. Seed with the branch-point expansion near -1/e, log1p near the origin
       (k = 0 only) and log z + 2 pi i k - log(log z + 2 pi i k) elsewhere
    2. Refine with Halley's method until |dw| < 0.7e-16 (2 + |w|)
    3. Check the residual and that Im(w) lies in the strip of branch k
    """
    if side not in (1, -1):
        raise ConfigError("side must be +1 or -1", details={"side": side})

    zz = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    scalar = np.ndim(z) == 0
    if not np.all(np.isfinite(zz)):
        raise DomainError("Lambert W argument must be finite", details={"z": str(z)})

    on_axis = zz.imag == 0
    if side == -1 and np.any(on_axis):
        # W_k(x - i0) = conj(W_{-k}(x + i0))
        out = np.empty_like(zz)
        out[on_axis] = np.conj(lambert_w_complex(-k, zz.real[on_axis].astype(complex), side=1))
        if not np.all(on_axis):
            out[~on_axis] = lambert_w_complex(k, zz[~on_axis], side=1)
        return complex(out[0]) if scalar else out

    # Real inputs are taken from above; a -0.0 imaginary part is not a side request
    zz.imag[on_axis] = 0.0
    upper = ~np.signbit(zz.imag)

    if k != 0 and np.any(zz == 0):
        raise DomainError(f"W_{k}(0) is not finite", details={"k": k})

    w = _initial_guess(k, zz, upper)
    w = _halley(w, zz)

    residual = np.abs(w * np.exp(w) - zz)
    bad = ~(residual <= 1e-12 * (1 + np.abs(zz)))
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ConvergenceError(
            "Lambert W iteration did not converge",
            details={"k": k, "z": str(zz[idx]), "residual": float(residual[idx])},
        )

    lo, hi = _branch_strip(k)
    im = w.imag
    off = (im < lo - 1e-9) | (im > hi + 1e-9)
    if np.any(off):
        idx = int(np.argmax(off))
        raise ConvergenceError(
            "Lambert W iteration converged to the wrong branch",
            details={"k": k, "z": str(zz[idx]), "w": str(w[idx])},
        )

    # Exact zero stays exact on the principal branch
    w[zz == 0] = 0.0
    return complex(w[0]) if scalar else w


def _branch_strip(k: int) -> tuple[float, float]:
    """Closed range of Im W_k."""
    if k == 0:
        return -math.pi, math.pi
    if k > 0:
        return (2 * k - 2) * math.pi, (2 * k + 1) * math.pi
    return (2 * k - 1) * math.pi, (2 * k + 2) * math.pi


def _sided_log(z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    # Principal log honouring the sign of a zero imaginary part
    return np.log(np.abs(z)) + 1j * np.arctan2(z.imag, z.real)


def _sided_sqrt_branch(z: NDArray[np.complex128], upper: NDArray[np.bool_]) -> NDArray[np.complex128]:
    """p = sqrt(2(e z + 1)), with cut-side aware sign for z on (-inf, -1/e)."""
    q = 2.0 * (math.e * z + 1.0)
    p = np.sqrt(q)
    on_cut = (q.imag == 0) & (q.real < 0)
    p[on_cut] = np.where(upper[on_cut], 1j, -1j) * np.sqrt(-q.real[on_cut])
    return p


def _initial_guess(
    k: int, z: NDArray[np.complex128], upper: NDArray[np.bool_]
) -> NDArray[np.complex128]:
    with np.errstate(divide="ignore", invalid="ignore"):
        log_z = _sided_log(np.where(z == 0, 1.0, z)) + 2j * math.pi * k
        w = log_z - _sided_log(np.where(log_z == 0, 1.0, log_z))

    near = np.abs(z - BRANCH_POINT) < 0.3
    p = _sided_sqrt_branch(z, upper)
    series_plus = -1.0 + p - p**2 / 3.0 + 11.0 / 72.0 * p**3
    series_minus = -1.0 - p - p**2 / 3.0 - 11.0 / 72.0 * p**3

    if k == 0:
        w = np.where(near, series_plus, w)
        small = ~near & (np.abs(z) <= 3.0) & (np.abs(1.0 + z) >= 0.5)
        w = np.where(small, np.log1p(np.where(small, z, 0.0)), w)
    elif k == -1:
        w = np.where(near & upper, series_minus, w)
    elif k == 1:
        w = np.where(near & ~upper, series_minus, w)
    return w


def _halley(w: NDArray[np.complex128], z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    max_iter = get_settings().lambert_max_iter
    w = w.astype(complex)
    for iteration in range(max_iter):
        ew = np.exp(w)
        f = w * ew - z
        w1 = w + 1.0
        safe = w1 != 0
        w1 = np.where(safe, w1, 1.0)
        dw = np.where(safe, f / (ew * w1 - (w + 2.0) * f / (2.0 * w1)), 0.0)
        w = w - dw
        if np.all(np.abs(dw) < 0.7e-16 * (2.0 + np.abs(w))):
            logger.debug(f"Halley converged after {iteration + 1} iterations")
            break
    return w


# ---------------------------------------------------------------------------
# Lambert W: real branches
# ---------------------------------------------------------------------------


@overload
def lambert_w_real(branch: int, x: float) -> float: ...
@overload
def lambert_w_real(branch: int, x: NDArray[np.float64]) -> NDArray[np.float64]: ...


def lambert_w_real(branch: int, x: ArrayLike) -> float | NDArray[np.float64]:
    """
    Evaluate the real branches W_0 and W_-1.

    Args:
        branch: 0 or -1
        x: Real scalar or array; x >= -1/e for branch 0, -1/e <= x < 0 for -1

    Returns:
        w with w*exp(w) = x; w >= -1 on branch 0 and w <= -1 on branch -1

    Raises:
        DomainError: If x lies outside the real range of the branch
    """
    if branch not in (0, -1):
        raise DomainError("real Lambert W exists only on branches 0 and -1", details={"branch": branch})
    xx = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    scalar = np.ndim(x) == 0

    slack = 4 * np.finfo(float).eps
    if np.any(~np.isfinite(xx)) or np.any(xx < BRANCH_POINT - slack):
        raise DomainError(
            f"x outside the real range of W_{branch}",
            details={"branch": branch, "min_x": float(np.nanmin(xx))},
        )
    if branch == -1 and np.any(xx >= 0):
        raise DomainError("W_-1 requires -1/e <= x < 0", details={"max_x": float(np.max(xx))})
    xx = np.maximum(xx, BRANCH_POINT)

    p = np.sqrt(np.maximum(2.0 * (math.e * xx + 1.0), 0.0))
    near = xx < -0.25
    with np.errstate(divide="ignore", invalid="ignore"):
        if branch == 0:
            big = xx >= 3.0
            log_x = np.log(np.where(big, xx, 3.0))
            w = np.where(big, log_x - np.log(log_x), np.log1p(np.where(near, 0.0, xx)))
            w = np.where(near, -1.0 + p - p**2 / 3.0 + 11.0 / 72.0 * p**3, w)
        else:
            log_x = np.log(np.where(near, 0.1, -xx))
            w = np.where(near, -1.0 - p - p**2 / 3.0 - 11.0 / 72.0 * p**3, log_x - np.log(-log_x))

    max_iter = get_settings().lambert_max_iter
    for _ in range(max_iter):
        ew = np.exp(w)
        f = w * ew - xx
        w1 = w + 1.0
        safe = w1 != 0
        w1 = np.where(safe, w1, 1.0)
        dw = np.where(safe, f / (ew * w1 - (w + 2.0) * f / (2.0 * w1)), 0.0)
        w = w - dw
        if np.all(np.abs(dw) < 0.7e-16 * (2.0 + np.abs(w))):
            break

    w = np.where(p == 0, -1.0, w)
    w = np.where(xx == 0, 0.0, w)
    return float(w[0]) if scalar else w


def lambert_w0_exp(y: ArrayLike) -> float | NDArray[np.float64]:
    """
    W_0(e^y) for real y without forming e^y.

    For y > 2 solves w + log w = y by Newton's method from y - log y.
    """
    yy = np.atleast_1d(np.asarray(y, dtype=float))
    scalar = np.ndim(y) == 0
    out = np.empty_like(yy)

    direct = yy <= 2.0
    if np.any(direct):
        out[direct] = lambert_w_real(0, np.exp(yy[direct]))
    large = ~direct
    if np.any(large):
        t = yy[large]
        w = t - np.log(t)
        for _ in range(50):
            dw = (w + np.log(w) - t) / (1.0 + 1.0 / w)
            w = w - dw
            if np.all(np.abs(dw) <= 1e-16 * np.abs(w)):
                break
        out[large] = w
    return float(out[0]) if scalar else out


def lambert_wm1_negexp(y: ArrayLike) -> float | NDArray[np.float64]:
    """
    W_-1(-e^(-y)) for real y >= 1 without forming e^(-y).

    Writes W_-1 = -v with v - log v = y, v >= 1, and solves by Newton's
    method away from the branch point.
    """
    yy = np.atleast_1d(np.asarray(y, dtype=float))
    scalar = np.ndim(y) == 0
    if np.any(yy < 1.0 - 1e-15):
        raise DomainError("W_-1(-exp(-y)) requires y >= 1", details={"min_y": float(np.min(yy))})
    out = np.empty_like(yy)

    direct = yy <= 3.0
    if np.any(direct):
        out[direct] = lambert_w_real(-1, -np.exp(-np.maximum(yy[direct], 1.0)))
    large = ~direct
    if np.any(large):
        t = yy[large]
        v = t + np.log(t)
        for _ in range(50):
            dv = (v - np.log(v) - t) / (1.0 - 1.0 / v)
            v = v - dv
            if np.all(np.abs(dv) <= 1e-16 * np.abs(v)):
                break
        out[large] = -v
    return float(out[0]) if scalar else out


def lambert_w0_series(z: complex, terms: int = 40) -> complex:
    """
    Power series W_0(z) = sum_{n>=1} (-n)^(n-1) z^n / n!.

    Converges for |z| < 1/e; this is the strong-coupling expansion.
    """
    if terms < 1:
        raise ConfigError("terms must be positive", details={"terms": terms})
    if abs(z) >= EXP_M1:
        raise DomainError("series for W_0 requires |z| < 1/e", details={"abs_z": abs(z)})
    total = 0j
    for n in range(1, terms + 1):
        log_mag = (n - 1) * math.log(n) - math.lgamma(n + 1)
        total += (-1) ** (n - 1) * math.exp(log_mag) * complex(z) ** n
    return total if isinstance(z, complex) else total.real  # type: ignore[return-value]


def arctan_branch(num: ArrayLike, den: ArrayLike) -> float | NDArray[np.float64]:
    """
    Continuous angle arctan(num/den), in [0, pi] for num >= 0 and in
    [-pi, 0] for num < 0.

    This is the angle of the point (den, num); it stays continuous when
    den changes sign, unlike arctan of the quotient.
    """
    angle = np.arctan2(num, den)
    return float(angle) if np.ndim(angle) == 0 else angle


# ---------------------------------------------------------------------------
# Polylogarithms
# ---------------------------------------------------------------------------


def dilog(z: complex | float, side: int = 1) -> complex:
    """
    Dilogarithm Li_2(z).

    Args:
        z: Complex argument
        side: For real z > 1 (on the cut) select Li_2(z + i0) (+1) or
            Li_2(z - i0) (-1)

    Returns:
        Li_2(z) as complex
    """
    if side not in (1, -1):
        raise ConfigError("side must be +1 or -1", details={"side": side})
    zc = complex(z)
    if not (math.isfinite(zc.real) and math.isfinite(zc.imag)):
        raise DomainError("dilog argument must be finite", details={"z": str(z)})
    if zc.imag == 0 and zc.real > 1:
        x = zc.real
        real = ZETA2 * 2 - 0.5 * math.log(x) ** 2 - float(mpmath.polylog(2, 1.0 / x).real)
        return complex(real, side * math.pi * math.log(x))
    return complex(mpmath.polylog(2, zc))


def polylog(order: int, x: float) -> float:
    """Real polylogarithm Li_s(x) for x <= 1."""
    if x > 1:
        raise DomainError("polylog defined here for x <= 1", details={"x": x})
    return float(mpmath.polylog(order, x).real)


def nielsen(n: int, p: int, z: float, spec: QuadSpec | None = None) -> float:
    """
    Nielsen generalized polylogarithm S_{n,p}(z) for real z <= 1.

    Args:
        n: Weight index, n >= 1
        p: Depth index, p >= 1
        z: Real argument, z <= 1
        spec: Quadrature tolerances (defaults from settings)

    Returns:
        S_{n,p}(z)

    Raises:
        ConfigError: If n or p is not positive
        DomainError: If z > 1
        QuadratureError: If the defining integral cannot be evaluated

    How it works:
    1. Start from the integral (-1)^(n+p-1)/((n-1)! p!) int_0^1 log^(n-1)(t)
       log^p(1 - z t) dt / t
    2. Substitute t = u^2, which removes the logarithmic endpoint behaviour
       at t = 0 from the integrand's leading factor
    3. Integrate adaptively on [0, 1]
    """
    if n < 1 or p < 1:
        raise ConfigError("Nielsen indices must be positive", details={"n": n, "p": p})
    if z > 1:
        raise DomainError("Nielsen polylogarithm requires z <= 1", details={"z": z})
    if z == 0:
        return 0.0
    spec = spec or QuadSpec.from_settings()

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        one_minus = 1.0 - z * u * u
        if one_minus <= 0.0:
            return 0.0
        return 2.0 * (2.0 * math.log(u)) ** (n - 1) * math.log(one_minus) ** p / u

    try:
        result = integrate(integrand, 0.0, 1.0, spec)
    except QuadratureError:
        raise
    except Exception as e:
        raise QuadratureError(
            "Failed to evaluate Nielsen integral",
            details={"n": n, "p": p, "z": z, "error": str(e), "type": type(e).__name__},
        ) from e

    prefactor = (-1) ** (n + p - 1) / (math.factorial(n - 1) * math.factorial(p))
    return prefactor * float(result.number.real)


def nielsen_generating_residual(
    x: float, y: float, z: float, order: int = 4, spec: QuadSpec | None = None
) -> float:
    """
    |2F1(-x, y; 1-x; z) - (1 - sum_{n,p<=order} S_{n,p}(z) x^n y^p)|.

    The hypergeometric side is evaluated directly with scipy.
    """
    direct = float(hyp2f1(-x, y, 1.0 - x, z))
    truncated = 1.0
    for n in range(1, order + 1):
        for p in range(1, order + 1):
            truncated -= nielsen(n, p, z, spec) * x**n * y**p
    return abs(direct - truncated)
