import math

import pytest

from phi4lambert.exceptions import ConfigError, DomainError
from phi4lambert.services.closedform import I_lambda, K, L, N
from phi4lambert.services.domains import LAMBDA_RADIUS
from phi4lambert.services.series import (
    G_lambda_coeffs,
    G_series2,
    I_coeffs_conjecture,
    I_coeffs_derivative_form,
    K_coeffs_derivative_form,
    KL_stirling_series,
    N2_coeff,
    lambda_coeffs,
    radius_estimate,
    stirling,
    stirling_generating_residual,
    stirling_table,
)
from phi4lambert.services.special import ZETA2


@pytest.mark.parametrize(
    "n, k, expected",
    [(1, 1, 1), (3, 1, 2), (3, 2, -3), (4, 1, -6), (4, 2, 11), (4, 3, -6), (5, 5, 1)],
)
def test_stirling_values(n, k, expected):
    assert stirling(n, k) == expected


def test_stirling_table_invariants():
    table = stirling_table(30)
    for n in range(1, 31):
        row = table.values[n]
        assert row[n] == 1
        assert row[1] == (-1) ** (n - 1) * math.factorial(n - 1)
        if n >= 2:
            assert sum(row) == 0
    # exact well past double precision
    assert abs(table.values[30][1]) == math.factorial(29)


def test_stirling_out_of_range():
    with pytest.raises(DomainError):
        stirling(3, 4)
    with pytest.raises(DomainError):
        stirling(3, 0)
    with pytest.raises(ConfigError):
        stirling_table(0)


def test_stirling_generating_function():
    assert stirling_generating_residual(0.3, 0.7, max_n=10) <= 1e-12


def test_conjecture_low_orders():
    a = 1.0
    coeffs = I_coeffs_conjecture(a, 2).coeffs
    assert coeffs[0] == 0.0
    assert coeffs[1] == pytest.approx(-math.log(2.0), rel=1e-15)
    assert coeffs[2] == pytest.approx((1 + 2 * a) * math.log1p(a) / (a * (1 + a)), rel=1e-14)


@pytest.mark.parametrize("a", [0.3, 1.0, 3.0])
def test_conjecture_matches_derivative_form(a):
    conjecture = I_coeffs_conjecture(a, 8).coeffs
    derivative = I_coeffs_derivative_form(a, 8).coeffs
    for n in range(1, 9):
        assert conjecture[n] == pytest.approx(derivative[n], rel=1e-7), n


def test_conjecture_at_central_point():
    conjecture = I_coeffs_conjecture(0.7, 6).coeffs
    derivative = I_coeffs_derivative_form(0.7, 6).coeffs
    assert conjecture == pytest.approx(derivative, rel=1e-8)


def test_k_derivative_form_second_order():
    assert K_coeffs_derivative_form(1.0, 2).coeffs[2] == pytest.approx(math.log(2.0) / 2.0, rel=1e-14)


def test_conjecture_resums_to_closed_form():
    a, lam = 1.0, 0.1
    coeffs = I_coeffs_conjecture(a, 20).coeffs
    total = sum(c * lam**n for n, c in enumerate(coeffs))
    assert total == pytest.approx(float(I_lambda(a, lam)), abs=1e-8)


def test_series_orders_rejected():
    with pytest.raises(ConfigError):
        I_coeffs_conjecture(1.0, 0)
    with pytest.raises(DomainError):
        I_coeffs_derivative_form(0.0, 3)


def test_kl_series_against_closed_form():
    k_series, l_series = KL_stirling_series(0.5, 0.1, 12, 12)
    assert k_series == pytest.approx(float(K(0.5, 0.1)), abs=1e-8)
    assert l_series == pytest.approx(float(L(0.5, 0.1)), abs=1e-8)


def test_kl_series_at_zero_momentum():
    k_series, l_series = KL_stirling_series(0.0, 0.1, 12, 0)
    assert k_series == 0.0
    assert l_series == pytest.approx(-math.log1p(0.1), abs=1e-12)


def test_g_series2_at_origin():
    c0, c1, c2 = G_series2(0.0, 0.0)
    assert c0 == 1.0
    assert c1 == 0.0
    assert c2 == pytest.approx(ZETA2 - 2.0, rel=1e-14)


def test_g_series2_symmetric():
    assert G_series2(0.5, 3.0) == pytest.approx(G_series2(3.0, 0.5), rel=1e-15)


def test_n2_coeff_values():
    expected = (ZETA2 + ZETA2) / 9.0 - 2.0 * math.log(2.0) / 3.0
    assert N2_coeff(1.0, 1.0) == pytest.approx(expected, rel=1e-14)
    assert N2_coeff(1.0, 2.0) == N2_coeff(2.0, 1.0)


def test_lambda_coeffs_of_polynomial():
    coeffs = lambda_coeffs(lambda lam: 1.0 + 2.0 * lam - 3.0 * lam**3, order=4, h=0.5, points=16)
    assert coeffs == pytest.approx([1.0, 2.0, 0.0, -3.0, 0.0], abs=1e-13)


def test_lambda_coeffs_config():
    with pytest.raises(ConfigError):
        lambda_coeffs(lambda lam: lam, order=8, points=8)
    with pytest.raises(ConfigError):
        lambda_coeffs(lambda lam: lam, order=2, h=0.0)


@pytest.mark.parametrize("a, b", [(0.0, 0.0), (1.0, 2.0), (0.5, 3.0)])
def test_g_coefficients_match_second_order(a, b):
    numeric = G_lambda_coeffs(a, b, 2).coeffs
    assert numeric == pytest.approx(list(G_series2(a, b)), abs=1e-7)


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (1.0, 2.0), (0.5, 3.0)])
def test_n2_coeff_matches_quadrature(a, b):
    coeffs = lambda_coeffs(lambda lam: N(a, b, lam), order=3, h=0.3, points=32)
    assert coeffs[0] == pytest.approx(0.0, abs=1e-10)
    assert coeffs[1] == pytest.approx(0.0, abs=1e-8)
    assert coeffs[2] == pytest.approx(N2_coeff(a, b), abs=1e-5)


def test_radius_estimate_of_geometric_series():
    coeffs = [(1.0 + 1.0 / (n + 1)) * 2.0**n for n in range(20)]
    assert radius_estimate(coeffs) == pytest.approx(0.5, rel=1e-2)
    with pytest.raises(DomainError):
        radius_estimate([1.0, 0.0])


@pytest.mark.slow
def test_radius_of_g_series_at_origin():
    # The joint radius bounds every single point from below; at a = b = 0 the
    # series reaches the critical curve, whose nearest point is -1
    coeffs = G_lambda_coeffs(0.0, 0.0, 24, h=0.5, points=128).coeffs
    radius = radius_estimate(coeffs)
    assert radius >= LAMBDA_RADIUS
    assert radius == pytest.approx(1.0, rel=0.05)
