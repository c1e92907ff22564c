"""
Domain Geometry Service

Curves in the coupling plane that delimit where the closed form is
holomorphic: the cochleoid branch boundaries, the critical curve, the
envelope of the N-integral domain and the curves N_lambda in the
momentum plane. Also the branch-index maps used by K_complex.

Curves are sampled densely; membership tests use horizontal ray crossing
against the sampled polyline and flag points closer to a boundary than
the configured band instead of guessing.
"""

import math
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq, minimize_scalar

from phi4lambert.config import get_settings
from phi4lambert.exceptions import BoundaryError, ConvergenceError, DomainError
from phi4lambert.logger import get_logger
from phi4lambert.schemas import ComplexVal, CurveId, CurveSample, RegionVerdict

logger = get_logger(__name__)

LOG4 = math.log(4.0)
LAMBDA_RADIUS = 1.0 / LOG4

# alpha cot alpha -> -inf at |alpha| -> pi; sampling stops where |C| ~ e^4.3
CRITICAL_ALPHA_MAX = 2.5

# polyline distances below this are polished on the exact curve
REFINE_RADIUS = 1e-2


def _samples(params: NDArray[np.float64], points: NDArray[np.complex128], curve: CurveId) -> list[CurveSample]:
    return [
        CurveSample(param=float(s), point=ComplexVal.of(complex(z)), curve_id=curve)
        for s, z in zip(params, points, strict=True)
    ]


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


def cochleoid_points(a: float, theta: ArrayLike) -> NDArray[np.complex128]:
    """theta -> -(1+a) sin(theta)/theta e^{i theta}, with the theta = 0 limit -(1+a)."""
    th = np.asarray(theta, dtype=float)
    return -(1.0 + a) * np.sinc(th / math.pi) * np.exp(1j * th)


def cochleoid(
    a: float, theta_range: tuple[float, float] = (-math.pi, math.pi), n: int | None = None
) -> list[CurveSample]:
    """Samples of the cochleoid through the branch-domain boundaries of K(a, .)."""
    if a < 0:
        raise DomainError("cochleoid requires a >= 0", details={"a": a})
    n = n or get_settings().curve_samples
    if n < 2:
        raise DomainError("need at least two samples", details={"n": n})
    theta = np.linspace(theta_range[0], theta_range[1], n)
    return _samples(theta, cochleoid_points(a, theta), CurveId.C_A)


def _alpha_cot_alpha(alpha: NDArray[np.float64]) -> NDArray[np.float64]:
    with np.errstate(divide="ignore", invalid="ignore"):
        value = alpha * np.cos(alpha) / np.sin(alpha)
    return np.where(alpha == 0, 1.0, value)


def critical_points(alpha: ArrayLike) -> NDArray[np.complex128]:
    """alpha -> -exp(1 - alpha cot alpha + i alpha)."""
    al = np.asarray(alpha, dtype=float)
    return -np.exp(1.0 - _alpha_cot_alpha(al) + 1j * al)


def critical_curve(
    alpha_range: tuple[float, float] = (-CRITICAL_ALPHA_MAX, CRITICAL_ALPHA_MAX), n: int | None = None
) -> list[CurveSample]:
    """Samples of the critical curve traced by the branch points of K as a varies."""
    lo, hi = alpha_range
    if not (-math.pi < lo < hi < math.pi):
        raise DomainError("critical curve needs -pi < alpha < pi", details={"range": alpha_range})
    n = n or get_settings().curve_samples
    alpha = np.linspace(lo, hi, n)
    return _samples(alpha, critical_points(alpha), CurveId.C_CRITICAL)


def cochleoid_cut_mask(a: float, alpha: ArrayLike) -> NDArray[np.bool_]:
    """
    True where the outer cochleoid boundary C_a is a genuine branch cut.

    That is the part with (1+a) sin(alpha)/alpha >= e^{1 - alpha cot alpha};
    elsewhere the branches on both sides continue each other.
    """
    al = np.asarray(alpha, dtype=float)
    return (1.0 + a) * np.sinc(al / math.pi) >= np.exp(1.0 - _alpha_cot_alpha(al))


def n_lambda_points(lam: float, t: ArrayLike) -> NDArray[np.complex128]:
    tt = np.asarray(t, dtype=float)
    return -0.5 + 1j * tt + lam * np.log(0.5 + 1j * tt)


def n_lambda_curve(
    lam: float, t_range: tuple[float, float] = (-50.0, 50.0), n: int | None = None
) -> list[CurveSample]:
    """Samples of N_lambda = {-1/2 + it + lambda log(1/2 + it)}."""
    n = n or get_settings().curve_samples
    t = np.linspace(t_range[0], t_range[1], n)
    return _samples(t, n_lambda_points(lam, t), CurveId.N_LAMBDA_CURVE)


# ---------------------------------------------------------------------------
# Envelope of the N-integral domain
# ---------------------------------------------------------------------------


def _log_minus(t: NDArray[np.float64]) -> NDArray[np.complex128]:
    return np.log(0.5 - 1j * t)


def _p(t: NDArray[np.float64]) -> NDArray[np.complex128]:
    return (0.5 + 1j * t) / _log_minus(t)


def _m(t: NDArray[np.float64]) -> NDArray[np.complex128]:
    return 1.0 / _log_minus(t)


def _dp(t: NDArray[np.float64]) -> NDArray[np.complex128]:
    lg = _log_minus(t)
    return 1j * (lg + (0.5 + 1j * t) / (0.5 - 1j * t)) / lg**2


def _dm(t: NDArray[np.float64]) -> NDArray[np.complex128]:
    lg = _log_minus(t)
    return 1j / ((0.5 - 1j * t) * lg**2)


def _tangency(t: float) -> float:
    arr = np.asarray(t, dtype=float)
    return float(np.imag(np.conj(_m(arr)) * _dp(arr)))


def _psi_equation(psi: float) -> float:
    ell = math.log(2.0 * math.cos(psi))
    return psi**2 + ell**2 - psi * math.sin(2 * psi) - math.cos(2 * psi) * ell


@lru_cache
def envelope_parameters() -> tuple[float, float]:
    """
    (t_E, psi) where the envelope switches from the a = 0 ray tip to the
    envelope of the a > 0 rays.

    Raises:
        ConvergenceError: If either root bracket fails
    """
    try:
        t_e = brentq(_tangency, 0.25, 0.8, xtol=1e-15)
        psi = brentq(_psi_equation, 0.5, 1.0, xtol=1e-15)
    except ValueError as e:
        raise ConvergenceError(
            "Envelope switch point could not be bracketed",
            details={"error": str(e), "type": type(e).__name__},
        ) from e
    logger.debug(f"Envelope switch at t_E={t_e:.12f}, psi={psi:.12f}")
    return float(t_e), float(psi)


def envelope_points(t: ArrayLike) -> NDArray[np.complex128]:
    tt = np.asarray(t, dtype=float)
    t_e, _ = envelope_parameters()
    p, m, dp, dm = _p(tt), _m(tt), _dp(tt), _dm(tt)
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = (np.conj(m) * dp - m * np.conj(dp)) / (m * np.conj(dm) - np.conj(m) * dm)
        outer = p + m * shift
    return np.where(np.abs(tt) <= t_e, p, outer)


def envelope(n: int | None = None, t_max: float = 50.0) -> tuple[float, float, list[CurveSample]]:
    """
    The envelope E bounding the joint holomorphicity domain of N.

    Returns:
        (t_E, psi, samples) with samples over t in [-t_max, t_max]
    """
    n = n or get_settings().curve_samples
    if n < 2:
        raise DomainError("need at least two samples", details={"n": n})
    t_e, psi = envelope_parameters()
    t = np.linspace(-t_max, t_max, n)
    return t_e, psi, _samples(t, envelope_points(t), CurveId.ENVELOPE)


@lru_cache
def joint_radius(t_max: float = 50.0, n: int = 4001) -> float:
    """
    Distance from lambda = 0 to the envelope.

    This is the radius of the largest disc on which G_lambda(a, b) is
    holomorphic for all a, b >= 0 at once. The series at a single (a, b) can
    converge further out.
    """
    t = _symmetric_params(t_max, n)
    dist = np.abs(envelope_points(t))
    i = int(np.nanargmin(dist))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    result = minimize_scalar(
        lambda s: float(np.abs(envelope_points(s))), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(dist[i], result.fun))


# ---------------------------------------------------------------------------
# Region membership
# ---------------------------------------------------------------------------


def _symmetric_params(t_max: float, n: int) -> NDArray[np.float64]:
    half = np.concatenate(([0.0], np.geomspace(1e-4, t_max, n // 2)))
    return np.concatenate((-half[:0:-1], half))


def _right_of(points: NDArray[np.complex128], z: complex) -> tuple[bool, float, int]:
    """
    Parity of crossings of the ray z + [0, inf) with the polyline, the
    distance from z to the polyline and the index of the nearest segment.
    An even count means z lies right of the curve.
    """
    p0, p1 = points[:-1], points[1:]
    y0, y1 = p0.imag, p1.imag
    straddle = ((y0 <= z.imag) & (z.imag < y1)) | ((y1 <= z.imag) & (z.imag < y0))
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = (z.imag - y0) / (y1 - y0)
    x_cross = p0.real + frac * (p1.real - p0.real)
    crossings = int(np.count_nonzero(straddle & (x_cross > z.real)))

    seg = p1 - p0
    seg_len2 = np.maximum(np.abs(seg) ** 2, 1e-300)
    s = np.clip(((z - p0) * np.conj(seg)).real / seg_len2, 0.0, 1.0)
    gaps = np.abs(p0 + s * seg - z)
    nearest = int(np.argmin(gaps))
    return crossings % 2 == 0, float(gaps[nearest]), nearest


def _refined_distance(
    curve: Callable[[NDArray[np.float64]], NDArray[np.complex128]],
    params: NDArray[np.float64],
    nearest: int,
    z: complex,
    coarse: float,
) -> float:
    """Polish the polyline distance on the exact curve around the nearest segment."""
    lo, hi = params[max(nearest - 1, 0)], params[min(nearest + 2, len(params) - 1)]
    result = minimize_scalar(
        lambda t: float(abs(curve(np.asarray(t))[()] - z)), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-14},
    )
    return min(coarse, float(result.fun))


def in_omega_N(lam: complex | float) -> RegionVerdict:
    """
    Whether lambda lies in the joint domain of N (right of the envelope).

    Real lambda is decided exactly against -1/log 4; complex lambda by ray
    crossing against the sampled envelope. Points within the boundary band
    are flagged indeterminate.
    """
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise DomainError("lambda must be finite", details={"lambda": str(lam)})
    band = get_settings().boundary_band

    if lam.imag == 0:
        distance = abs(lam.real + LAMBDA_RADIUS)
        return RegionVerdict(
            inside=lam.real > -LAMBDA_RADIUS and distance > band,
            distance_estimate=distance,
            nearest_curve=CurveId.ENVELOPE,
            indeterminate=distance <= band,
        )

    t_max = max(100.0, 20.0 * abs(lam))
    params = _symmetric_params(t_max, get_settings().curve_samples)
    points = envelope_points(params)
    inside, distance, nearest = _right_of(points, lam)
    if distance < REFINE_RADIUS:
        distance = _refined_distance(envelope_points, params, nearest, lam, distance)
    if abs(lam.imag) > float(np.max(np.abs(points.imag))):
        logger.warning(f"lambda={lam} lies beyond the sampled envelope")
        return RegionVerdict(
            inside=False, distance_estimate=distance, nearest_curve=CurveId.ENVELOPE, indeterminate=True
        )
    indeterminate = distance <= band
    return RegionVerdict(
        inside=inside and not indeterminate,
        distance_estimate=distance,
        nearest_curve=CurveId.ENVELOPE,
        indeterminate=indeterminate,
    )


def in_omega_lambda_ab(z: complex | float, lam: float) -> RegionVerdict:
    """
    Whether a complexified momentum z lies in the domain of N at real lambda:
    Re z > -1/2 and z right of the curve N_lambda.
    """
    z = complex(z)
    if lam <= -LAMBDA_RADIUS:
        raise DomainError("in_omega_lambda_ab requires lambda > -1/log 4", details={"lambda": lam})
    band = get_settings().boundary_band

    half_plane = z.real + 0.5
    if half_plane <= band:
        return RegionVerdict(
            inside=False,
            distance_estimate=abs(half_plane),
            nearest_curve=CurveId.N_LAMBDA_CURVE,
            indeterminate=abs(half_plane) <= band,
        )

    t_max = max(100.0, 20.0 * abs(z))
    params = _symmetric_params(t_max, get_settings().curve_samples)
    points = n_lambda_points(lam, params)
    inside, distance, nearest = _right_of(points, z)
    if distance < REFINE_RADIUS:
        distance = _refined_distance(lambda t: n_lambda_points(lam, t), params, nearest, z, distance)
    indeterminate = distance <= band
    return RegionVerdict(
        inside=inside and not indeterminate,
        distance_estimate=min(distance, half_plane),
        nearest_curve=CurveId.N_LAMBDA_CURVE,
        indeterminate=indeterminate,
    )


# ---------------------------------------------------------------------------
# Branch indices
# ---------------------------------------------------------------------------


def lambda_thresholds(a: float, phi: float, k_max: int = 8) -> list[float]:
    """
    Thresholds lambda_k(phi), k = 0..k_max, solving
    phi + (1+a) sin(phi)/lambda_k = (2k+1) pi for 0 < |phi| < pi.
    """
    if not 0 < abs(phi) < math.pi:
        raise DomainError("thresholds need 0 < |phi| < pi", details={"phi": phi})
    s = (1.0 + a) * math.sin(abs(phi))
    return [s / ((2 * k + 1) * math.pi - abs(phi)) for k in range(k_max + 1)]


def branch_index_lambda(a: float, lam: complex | float) -> int:
    """
    Branch label of W used by K(a, lambda) for complex lambda.

    Real lambda > 0 and lambda < -1-a take W_0, -1-a < lambda < 0 takes
    W_-1. Off the real axis the label is -k above and +k below, where
    lambda_k(phi) < |lambda| <= lambda_{k-1}(phi).

    Raises:
        BoundaryError: If lambda is within the band of a threshold
        DomainError: If a < 0
    """
    if a < 0:
        raise DomainError("branch_index_lambda requires a >= 0", details={"a": a})
    lam = complex(lam)
    band = get_settings().boundary_band

    if lam.imag == 0:
        x = lam.real
        if abs(x + 1.0 + a) <= band:
            raise BoundaryError(
                "lambda = -1-a sits on the W_0 / W_-1 threshold",
                details={"a": a, "lambda": x},
            )
        return -1 if -1.0 - a < x < 0 else 0

    radius, phi = abs(lam), math.atan2(lam.imag, lam.real)
    x = abs(phi) + (1.0 + a) * math.sin(abs(phi)) / radius
    k = math.floor((x + math.pi) / (2 * math.pi))

    for j in (k - 1, k):
        if j < 0:
            continue
        threshold = (1.0 + a) * math.sin(abs(phi)) / ((2 * j + 1) * math.pi - abs(phi))
        if abs(radius - threshold) <= band:
            on_cut = j == 0 and bool(cochleoid_cut_mask(a, math.pi - abs(phi)))
            raise BoundaryError(
                "lambda lies on the solid branch cut of C_a" if on_cut else "lambda lies on a branch threshold",
                details={"a": a, "lambda": str(lam), "k": j, "curve": CurveId.C_A.value},
            )
    return -k if phi > 0 else k


def branch_index_z(z: complex | float, lam: float) -> int:
    """
    Branch label of W used by K(z, lambda) for complex z at real lambda.

    lambda > 0: label k with (2k-1) pi lambda < Im z <= (2k+1) pi lambda.
    -1 < lambda < 0: label -k with (2k-2) pi |lambda| <= Im z < 2k pi |lambda|
    for Im z >= 0, mirrored below the axis.

    Raises:
        DomainError: If z lies on one of the cuts B_plus, B_minus or B_zero
    """
    z = complex(z)
    band = get_settings().boundary_band

    if lam == 0:
        return 0
    if lam > 0:
        reach = -(1.0 + lam - lam * math.log(lam))
        for sign, curve in ((1, CurveId.B_PLUS), (-1, CurveId.B_MINUS)):
            if abs(z.imag - sign * lam * math.pi) <= band and z.real <= reach + band:
                raise DomainError(
                    f"z lies on the branch cut {curve.value}",
                    details={"z": str(z), "lambda": lam, "curve": curve.value},
                )
        return math.ceil(z.imag / (2 * math.pi * lam) - 0.5)

    if lam <= -1:
        raise DomainError("complex z is supported for lambda > -1 only", details={"lambda": lam})
    s = -lam
    reach = -1.0 + s - s * math.log(s)
    if abs(z.imag) <= band and z.real < reach + band:
        raise DomainError(
            f"z lies on the branch cut {CurveId.B_ZERO.value}",
            details={"z": str(z), "lambda": lam, "curve": CurveId.B_ZERO.value},
        )
    ratio = z.imag / (2 * math.pi * s)
    if z.imag >= 0:
        return -(math.floor(ratio) + 1)
    return -math.floor(ratio)
