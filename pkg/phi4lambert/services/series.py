"""
Perturbative Series Service

Stirling numbers of the first kind, the closed-form lambda-coefficients of
I_lambda(a) and their Lagrange-Buermann derivative form, the double series
of K and L, the second-order expansion of G and N, and numerical Taylor
coefficients in lambda by a Cauchy contour rule.
"""

import math
from collections.abc import Callable, Sequence
from functools import lru_cache

import numpy as np
import sympy as sp
from numpy.typing import NDArray
from scipy.special import binom

from phi4lambert.exceptions import ConfigError, DomainError
from phi4lambert.logger import get_logger
from phi4lambert.schemas import SeriesCoeffs, StirlingTable
from phi4lambert.services.closedform import G_array
from phi4lambert.services.special import ZETA2, dilog

logger = get_logger(__name__)

# Stirling numbers are kept exact up to this size by default
DEFAULT_MAX_N = 40


# ---------------------------------------------------------------------------
# Stirling numbers
# ---------------------------------------------------------------------------


@lru_cache
def stirling_table(max_n: int = DEFAULT_MAX_N) -> StirlingTable:
    """
    Signed Stirling numbers of the first kind from s_{n+1,k} = s_{n,k-1} - n s_{n,k}.

    Entries are Python ints, so the table is exact at any size.
    """
    if max_n < 1:
        raise ConfigError("max_n must be positive", details={"max_n": max_n})
    rows: list[list[int]] = [[1]]
    for n in range(max_n):
        prev = rows[-1] + [0]
        row = [0] * (n + 2)
        for k in range(1, n + 2):
            row[k] = prev[k - 1] - n * prev[k]
        rows.append(row)
    return StirlingTable(max_n=max_n, values=rows)


def _entry(table: StirlingTable, n: int, k: int) -> int:
    """s_{n,k} with the conventions s_{n,k} = 0 for k > n and s_{n,0} = 0 for n >= 1."""
    if k < 0 or k > n:
        return 0
    if n > table.max_n:
        table = stirling_table(n)
    return table.values[n][k]


def stirling(n: int, k: int, table: StirlingTable | None = None) -> int:
    """
    Exact s_{n,k} for 1 <= k <= n.

    Raises:
        DomainError: If the indices are out of range
    """
    if not 1 <= k <= n:
        raise DomainError("stirling requires 1 <= k <= n", details={"n": n, "k": k})
    table = table or stirling_table(max(n, DEFAULT_MAX_N))
    if n > table.max_n:
        raise DomainError("n exceeds the table size", details={"n": n, "max_n": table.max_n})
    return table.values[n][k]


def stirling_generating_residual(z: float, u: float, max_n: int = 10) -> float:
    """
    Largest deviation of sum_k s_{n,k} u^k z^n / n! from the z^n term
    binom(u, n) z^n of (1+z)^u, over n <= max_n.
    """
    table = stirling_table(max(max_n, 1))
    worst = 0.0
    for n in range(max_n + 1):
        coefficient = sum(table.values[n][k] * u**k for k in range(n + 1)) / math.factorial(n)
        worst = max(worst, abs((coefficient - float(binom(u, n))) * z**n))
    return worst


# ---------------------------------------------------------------------------
# Coefficients of I_lambda(a)
# ---------------------------------------------------------------------------


def _check_order(order: int) -> None:
    if order < 1:
        raise ConfigError("order must be at least 1", details={"order": order})


def I_coeffs_conjecture(a: float, order: int) -> SeriesCoeffs:
    """
    lambda-coefficients of I_lambda(a) from the double Stirling sum.

    c_1 = -log(1+a), and for n >= 1 the coefficient of lambda^{n+1} is

        l^n/(n a^n) + l^n/(n (1+a)^n)
        + (n-1)!/(1+a)^n sum_{j=1}^{n-1} sum_{k=0}^{n} (-1)^j s_{j,n-k}/(k! j!)
              (((1+a)/a)^{n-j} + 1) l^k

    with l = log(1+a).
    """
    _check_order(order)
    if a <= 0:
        raise DomainError("I_coeffs_conjecture requires a > 0", details={"a": a})
    table = stirling_table(max(order, DEFAULT_MAX_N))
    ell = math.log1p(a)
    ratio = (1.0 + a) / a

    coeffs = [0.0, -ell]
    for n in range(1, order):
        value = ell**n / (n * a**n) + ell**n / (n * (1.0 + a) ** n)
        inner = 0.0
        for j in range(1, n):
            shape = ratio ** (n - j) + 1.0
            for k in range(n + 1):
                s = _entry(table, j, n - k)
                if s:
                    inner += (-1) ** j * s / (math.factorial(k) * math.factorial(j)) * shape * ell**k
        value += math.factorial(n - 1) / (1.0 + a) ** n * inner
        coeffs.append(value)
    return SeriesCoeffs(coeffs=coeffs, order=order, eval_a=a)


_A = sp.Symbol("a", positive=True)


@lru_cache
def _lagrange_terms(n: int) -> tuple[sp.Expr, sp.Expr]:
    """
    The lambda^n terms of the Lagrange-Buermann series of K and of lambda L:
    d^{n-1}/da^{n-1} (-l)^n / n!  and  -d^{n-2}/da^{n-2} ((-l)^{n-1}/a) / (n-1)!.
    """
    ell = sp.log(1 + _A)
    k_term = sp.diff((-ell) ** n, _A, n - 1) / sp.factorial(n)
    if n == 1:
        return sp.simplify(k_term), sp.Integer(0)
    l_term = -sp.diff((-ell) ** (n - 1) / _A, _A, n - 2) / sp.factorial(n - 1)
    return k_term, l_term


@lru_cache
def _lagrange_numeric(n: int) -> tuple[Callable[[float], float], Callable[[float], float]]:
    k_term, l_term = _lagrange_terms(n)
    return sp.lambdify(_A, k_term, "math"), sp.lambdify(_A, l_term, "math")


def K_coeffs_derivative_form(a: float, order: int) -> SeriesCoeffs:
    """lambda-coefficients of K(a, lambda) from its Lagrange-Buermann series."""
    _check_order(order)
    if a <= 0:
        raise DomainError("derivative form requires a > 0", details={"a": a})
    coeffs = [0.0] + [float(_lagrange_numeric(n)[0](a)) for n in range(1, order + 1)]
    return SeriesCoeffs(coeffs=coeffs, order=order, eval_a=a)


def I_coeffs_derivative_form(a: float, order: int) -> SeriesCoeffs:
    """lambda-coefficients of I_lambda = K - lambda L, both from symbolic derivatives."""
    _check_order(order)
    if a <= 0:
        raise DomainError("derivative form requires a > 0", details={"a": a})
    coeffs = [0.0]
    for n in range(1, order + 1):
        k_term, l_term = _lagrange_numeric(n)
        coeffs.append(float(k_term(a)) + float(l_term(a)))
    logger.debug(f"Derivative-form coefficients at a={a:g} up to order {order}")
    return SeriesCoeffs(coeffs=coeffs, order=order, eval_a=a)


def KL_stirling_series(a: float, lam: float, order_n: int = 12, order_m: int = 12) -> tuple[float, float]:
    """
    Truncated double series

        K = sum_{n,m>=1} s_{m+n-1,n} (-lambda)^n a^m / m!
        L = sum_{n>=1, m>=0} s_{m+n,n}/(m+n) (-lambda)^n a^m / m!

    Converges for |a| < 1 and small lambda.
    """
    if order_n < 1 or order_m < 0:
        raise ConfigError("orders must be positive", details={"order_n": order_n, "order_m": order_m})
    if abs(a) >= 1:
        logger.warning(f"KL_stirling_series at |a|={abs(a):g} >= 1 is outside its convergence region")
    table = stirling_table(max(order_n + order_m, DEFAULT_MAX_N))

    k_sum = 0.0
    l_sum = 0.0
    for n in range(1, order_n + 1):
        coupling = (-lam) ** n
        for m in range(0, order_m + 1):
            power = coupling * a**m / math.factorial(m)
            if m >= 1:
                k_sum += table.values[m + n - 1][n] * power
            l_sum += table.values[m + n][n] / (m + n) * power
    return k_sum, l_sum


# ---------------------------------------------------------------------------
# Second order of G and N
# ---------------------------------------------------------------------------


def _log1p_ratio(x: float) -> float:
    """log(1+x)/x with its value 1 at x = 0."""
    return math.log1p(x) / x if x != 0 else 1.0


def _li2_neg(x: float) -> float:
    return dilog(-x).real


def G_series2(a: float, b: float) -> tuple[float, float, float]:
    """
    (c0, c1, c2) with G = c0 + c1 lambda + c2 lambda^2 + O(lambda^3).

    The 1/a and 1/b terms are taken at their limits for a = 0 or b = 0.
    """
    if a < 0 or b < 0:
        raise DomainError("G_series2 requires a, b >= 0", details={"a": a, "b": b})
    s = 1.0 + a + b
    la, lb = math.log1p(a), math.log1p(b)
    c0 = 1.0 / s
    c1 = (la + lb) / s**2
    edge = (1.0 + 2.0 * a) / (1.0 + a) * _log1p_ratio(a) + (1.0 + 2.0 * b) / (1.0 + b) * _log1p_ratio(b)
    bulk = la**2 + la * lb + lb**2 + ZETA2 - _li2_neg(a) - _li2_neg(b)
    c2 = -edge / s**2 + bulk / s**3
    return c0, c1, c2


def N2_coeff(a: float, b: float) -> float:
    """
    [lambda^2] N_lambda(a, b)
        = (zeta(2) - Li2(-a) - Li2(-b))/(1+a+b)^2 - log(1+a)/(a(1+a+b)) - log(1+b)/(b(1+a+b))
    """
    if a < 0 or b < 0:
        raise DomainError("N2_coeff requires a, b >= 0", details={"a": a, "b": b})
    s = 1.0 + a + b
    return (ZETA2 - _li2_neg(a) - _li2_neg(b)) / s**2 - (_log1p_ratio(a) + _log1p_ratio(b)) / s


# ---------------------------------------------------------------------------
# Numerical lambda-series
# ---------------------------------------------------------------------------


def lambda_coeffs(
    f: Callable[[complex], complex | float], order: int, h: float = 0.3, points: int = 64
) -> NDArray[np.float64]:
    """
    Taylor coefficients c_0..c_order of f at lambda = 0 by the trapezoidal
    rule on the circle |lambda| = h:

        c_n = (1/M) sum_j f(h w_j) w_j^{-n} / h^n,   w_j = e^{2 pi i j/M}

    f must be analytic on the closed disc of radius h and real on the real
    axis; imaginary parts of the result are dropped.
    """
    if order < 0 or points <= order:
        raise ConfigError("need 0 <= order < points", details={"order": order, "points": points})
    if h <= 0:
        raise ConfigError("contour radius must be positive", details={"h": h})
    nodes = h * np.exp(2j * math.pi * np.arange(points) / points)
    # real nodes go through the real code paths
    on_axis = np.abs(nodes.imag) < 1e-14 * h
    samples = np.array(
        [complex(f(float(z.real) if real else complex(z))) for z, real in zip(nodes, on_axis, strict=True)]
    )
    coeffs = np.fft.fft(samples) / points
    scale = h ** np.arange(points)
    result = coeffs[: order + 1] / scale[: order + 1]
    drift = float(np.max(np.abs(result.imag))) if result.size else 0.0
    if drift > 1e-6 * max(1.0, float(np.max(np.abs(result.real)))):
        logger.warning(f"lambda_coeffs: imaginary parts up to {drift:.3g} dropped")
    return result.real


def G_lambda_coeffs(a: float, b: float, order: int, h: float = 0.3, points: int = 64) -> SeriesCoeffs:
    """Taylor coefficients in lambda of the closed-form G at (a, b)."""

    def g(lam: complex | float) -> complex | float:
        return G_array(a, b, lam)[0]  # type: ignore[return-value]

    coeffs = lambda_coeffs(g, order, h, points)
    return SeriesCoeffs(coeffs=[float(c) for c in coeffs], order=order, eval_a=a, eval_b=b)


def radius_estimate(coeffs: Sequence[float], tail: int = 4) -> float:
    """
    Radius of convergence from the tail of a coefficient list.

    The ratios |c_n / c_{n-1}| are fitted linearly in 1/n over the last
    `tail` orders and extrapolated to n -> infinity; the radius is the
    inverse of the limit.
    """
    c = np.asarray(coeffs, dtype=float)
    n = np.arange(c.size)
    usable = (c[1:] != 0) & (c[:-1] != 0)
    ratios = np.abs(c[1:][usable] / c[:-1][usable])
    orders = n[1:][usable]
    if ratios.size < 2:
        raise DomainError("need at least three nonzero coefficients", details={"size": int(c.size)})
    take = min(tail, ratios.size)
    slope, limit = np.polyfit(1.0 / orders[-take:], ratios[-take:], 1)
    logger.debug(f"radius_estimate: ratio limit {limit:.6g}, slope {slope:.3g}")
    if limit <= 0:
        raise DomainError("coefficient ratios do not settle", details={"limit": float(limit)})
    return float(1.0 / limit)
