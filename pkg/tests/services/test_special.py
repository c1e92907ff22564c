import math

import mpmath
import numpy as np
import pytest
from scipy.special import lambertw

from phi4lambert.exceptions import ConfigError, DomainError
from phi4lambert.services.special import (
    BRANCH_POINT,
    ZETA2,
    arctan_branch,
    dilog,
    lambert_w0_exp,
    lambert_w0_series,
    lambert_w_complex,
    lambert_w_real,
    lambert_wm1_negexp,
    nielsen,
    nielsen_generating_residual,
    polylog,
)

OMEGA = 0.5671432904097838


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_lambert_residual_random_points(k):
    rng = np.random.default_rng(20 + k)
    radius = 10.0 ** rng.uniform(-3, 3, 2000)
    angle = rng.uniform(-math.pi, math.pi, 2000)
    z = radius * np.exp(1j * angle)
    w = lambert_w_complex(k, z)
    assert np.all(np.abs(w * np.exp(w) - z) <= 1e-12 * (1 + np.abs(z)))


@pytest.mark.parametrize("k", [-1, 0, 1])
@pytest.mark.parametrize("z", [0.5 + 0.5j, -2.0 + 0.1j, 10.0 - 3.0j, 1e-3j, 50.0])
def test_lambert_matches_scipy(k, z):
    assert lambert_w_complex(k, z) == pytest.approx(complex(lambertw(z, k)), rel=1e-12, abs=1e-14)


def test_lambert_on_cut_side():
    above = lambert_w_complex(0, -1.0, side=1)
    below = lambert_w_complex(0, -1.0, side=-1)
    assert above.imag > 0 > below.imag
    assert above == pytest.approx(below.conjugate())


@pytest.mark.parametrize("k", [-1, 0, 1])
@pytest.mark.parametrize("x", [-2.0, -1.0, -0.2, -0.05])
@pytest.mark.parametrize("side", [1, -1])
def test_lambert_cut_limits_match_scipy(k, x, side):
    # both cuts: x < -1/e and -1/e < x < 0
    expected = complex(lambertw(complex(x, side * 1e-300), k))
    assert lambert_w_complex(k, x, side=side) == pytest.approx(expected, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("k", [-1, 0, 1])
def test_lambert_cut_conjugation(k):
    x = np.array([-3.0, -1.0, -0.3, -0.1])
    below = lambert_w_complex(k, x.astype(complex), side=-1)
    above = lambert_w_complex(-k, x.astype(complex), side=1)
    np.testing.assert_allclose(below, np.conj(above), rtol=1e-14)


def test_lambert_side_leaves_off_axis_points_alone():
    z = np.array([-2.0 + 0.5j, -2.0 + 0.0j, 1.0 - 1.0j])
    below = lambert_w_complex(0, z, side=-1)
    assert below[0] == pytest.approx(complex(lambertw(z[0], 0)), rel=1e-12)
    assert below[2] == pytest.approx(complex(lambertw(z[2], 0)), rel=1e-12)
    assert below[1].imag < 0


def test_lambert_zero():
    assert lambert_w_complex(0, 0j) == 0
    with pytest.raises(DomainError):
        lambert_w_complex(1, 0j)


def test_lambert_real_branches():
    assert lambert_w_real(0, 1.0) == pytest.approx(OMEGA, rel=1e-15)
    assert lambert_w_real(0, BRANCH_POINT) == pytest.approx(-1.0)
    assert lambert_w_real(-1, -0.1) == pytest.approx(lambertw(-0.1, -1).real, rel=1e-14)
    x = np.array([-0.3, 0.0, 2.0, 1e6])
    np.testing.assert_allclose(lambert_w_real(0, x), lambertw(x, 0).real, rtol=1e-14, atol=1e-300)


@pytest.mark.parametrize("branch, x", [(0, -1.0), (-1, 0.5), (-1, -0.5), (2, 1.0)])
def test_lambert_real_domain(branch, x):
    with pytest.raises(DomainError):
        lambert_w_real(branch, x)


@pytest.mark.parametrize("y", [-5.0, 0.0, 2.0, 3.5, 50.0])
def test_w0_exp_without_overflow(y):
    w = lambert_w0_exp(y)
    assert w + math.log(w) == pytest.approx(y, abs=1e-13)
    if y < 700:
        assert w == pytest.approx(lambertw(math.exp(y)).real, rel=1e-13)


def test_w0_exp_huge_argument():
    w = lambert_w0_exp(2000.0)
    assert w + math.log(w) == pytest.approx(2000.0, rel=1e-15)


@pytest.mark.parametrize("y", [1.5, 3.0, 10.0])
def test_wm1_negexp(y):
    assert lambert_wm1_negexp(y) == pytest.approx(lambertw(-math.exp(-y), -1).real, rel=1e-12)


def test_wm1_negexp_domain():
    with pytest.raises(DomainError):
        lambert_wm1_negexp(0.5)


def test_w0_series():
    assert lambert_w0_series(0.2, 80) == pytest.approx(lambertw(0.2).real, rel=1e-12)
    with pytest.raises(DomainError):
        lambert_w0_series(0.5)
    with pytest.raises(ConfigError):
        lambert_w0_series(0.1, 0)


def test_arctan_branch_is_continuous_angle():
    assert arctan_branch(1.0, -1.0) == pytest.approx(3 * math.pi / 4)
    assert arctan_branch(-1.0, -1.0) == pytest.approx(-3 * math.pi / 4)
    assert arctan_branch(1.0, 0.0) == pytest.approx(math.pi / 2)
    den = np.array([1.0, 0.0, -1.0])
    assert np.all(np.diff(arctan_branch(0.5, den)) > 0)


def test_dilog_values():
    assert dilog(-1.0).real == pytest.approx(-ZETA2 / 2, rel=1e-14)
    assert dilog(0.5).real == pytest.approx(ZETA2 / 2 - 0.5 * math.log(2) ** 2, rel=1e-14)
    z = 0.3 + 0.7j
    assert dilog(z) == pytest.approx(complex(mpmath.polylog(2, z)), rel=1e-14)


def test_dilog_on_cut():
    above = dilog(2.0, side=1)
    below = dilog(2.0, side=-1)
    assert above.real == pytest.approx(math.pi**2 / 4, rel=1e-13)
    assert above.imag == pytest.approx(math.pi * math.log(2))
    assert below == pytest.approx(above.conjugate())


def test_polylog():
    assert polylog(3, 1.0) == pytest.approx(float(mpmath.zeta(3)), rel=1e-14)
    with pytest.raises(DomainError):
        polylog(2, 1.5)


def test_nielsen_special_cases(spec):
    assert nielsen(1, 1, 0.5, spec) == pytest.approx(dilog(0.5).real, rel=1e-9)
    assert nielsen(2, 1, 0.5, spec) == pytest.approx(polylog(3, 0.5), rel=1e-9)
    assert nielsen(1, 2, 1.0, spec) == pytest.approx(float(mpmath.zeta(3)), rel=1e-8)


def test_nielsen_domain():
    with pytest.raises(DomainError):
        nielsen(1, 1, 1.5)
    with pytest.raises(ConfigError):
        nielsen(0, 1, 0.5)


@pytest.mark.parametrize("z", [-1.0, -0.5, 0.5])
def test_nielsen_generating_identity(spec, z):
    assert nielsen_generating_residual(0.05, 0.05, z, order=4, spec=spec) <= 1e-6
