import math

import numpy as np
import pytest
from scipy.special import lambertw

from phi4lambert.exceptions import BoundaryError, DomainError
from phi4lambert.schemas import ComplexVal, EvalPoint
from phi4lambert.services.closedform import (
    G,
    G_alt,
    G_array,
    G_hilbert,
    I_lambda,
    K,
    K_complex,
    L,
    L_integral,
    N,
    cot_tau_residual,
    lambert_factor,
    n_integral,
    pde_residuals,
    strong_coupling_K,
    tau,
)
from phi4lambert.services.series import G_series2
from phi4lambert.services.special import lambert_w_real


def test_k_known_value():
    assert K(1.0, 1.0) == pytest.approx(-0.4428544010023887, rel=1e-13)
    assert lambert_factor(1.0, 1.0) == pytest.approx(1.5571455989976113, rel=1e-14)


def test_k_at_zero_coupling_and_momentum():
    assert K(3.0, 0.0) == 0.0
    assert K(0.0, 0.7) == 0.0


@pytest.mark.parametrize("lam", [1e-3, 0.25, 1.0, 10.0, -0.5, -0.9])
def test_k_functional_equation(lam):
    a = np.array([0.0, 0.1, 1.0, 7.0, 50.0])
    k = np.asarray(K(a, lam))
    assert np.all(np.abs(k + lam * np.log(1 + a + k)) <= 1e-12 * (1 + np.abs(k)))


def test_k_small_coupling_without_overflow():
    k = K(2.0, 1e-3)
    assert k == pytest.approx(-1e-3 * math.log(3.0), rel=1e-2)
    assert math.isfinite(k)


def test_k_negative_coupling_uses_lower_branch():
    a, lam = 1.0, -0.5
    expected = lam * lambertw(math.exp((1 + a) / lam) / lam, -1).real - 1 - a
    assert K(a, lam) == pytest.approx(expected, rel=1e-12)


def test_k_domain():
    with pytest.raises(DomainError):
        K(1.0, -1.5)
    with pytest.raises(DomainError):
        K(-1.0, 0.5)


def test_l_values():
    assert L(0.0, 0.5) == pytest.approx(-math.log(1.5))
    assert L(0.5, 0.1) == pytest.approx(math.log((0.5 + K(0.5, 0.1)) / 0.5), rel=1e-14)


@pytest.mark.parametrize("a, lam", [(0.5, 0.5), (1.0, 1.0), (3.0, 2.0)])
def test_l_flow_integral(spec, a, lam):
    assert L_integral(a, lam, spec) == pytest.approx(L(a, lam), abs=1e-8)


def test_l_integral_domain():
    with pytest.raises(DomainError):
        L_integral(1.0, -0.5)


def test_i_lambda_first_order():
    h = 1e-5
    slope = (I_lambda(1.0, h) - I_lambda(1.0, -h)) / (2 * h)
    assert slope == pytest.approx(-math.log(2.0), abs=1e-8)


def test_strong_coupling_series():
    series = strong_coupling_K(1.0, 10.0, terms=40)
    assert series == pytest.approx(K(1.0, 10.0), abs=1e-10)
    with pytest.raises(DomainError):
        strong_coupling_K(1.0, 1.0)


def test_tau_small_coupling():
    lam = 1e-4
    assert tau(1.0, 2.0, lam) == pytest.approx(lam * math.pi / 4.0, rel=1e-3)


def test_tau_endpoint_and_range():
    assert tau(0.0, 0.0, 1.0) == 0.0
    assert tau(0.0, 0.0, -0.5) == pytest.approx(-math.pi)
    p = np.linspace(0.0, 20.0, 41)
    positive = np.asarray(tau(1.0, p, 0.5))
    negative = np.asarray(tau(1.0, p, -0.5))
    assert np.all((positive >= 0) & (positive <= math.pi))
    assert np.all((negative >= -math.pi) & (negative <= 0))
    assert 0 < tau(1.0, 2.0, 0.5) < math.pi / 2


@pytest.mark.parametrize("a, b, lam", [(2.0, 1.0, 0.5), (0.5, 3.0, 1.0), (1.0, 0.0, 2.0)])
def test_cot_tau_relations(a, b, lam):
    direct, shift = cot_tau_residual(a, b, lam)
    assert abs(direct) <= 1e-8
    assert abs(shift) <= 1e-8


def test_pde_system():
    first, second = pde_residuals(1.0, 0.5, h=1e-4)
    assert abs(first) <= 1e-6
    assert abs(second) <= 1e-6


def test_k_complex_real_inputs_agree_with_k():
    assert K_complex(1.0, 0.5) == pytest.approx(K(1.0, 0.5))
    assert K_complex(1.0, 0j) == 0


@pytest.mark.parametrize("z, lam", [(1.0, 0.3 + 0.2j), (0.0, -0.4 - 0.3j), (1.0 + 2j, 0.5), (0.5 - 3j, -0.5)])
def test_k_complex_functional_equation(z, lam):
    k = K_complex(z, lam)
    assert abs(k + lam * np.log(1 + z + k)) <= 1e-10 * (1 + abs(k))


def test_k_complex_rejects_two_complex_arguments():
    with pytest.raises(DomainError):
        K_complex(1 + 1j, 0.5 + 0.5j)


def test_n_vanishes_at_zero_coupling():
    assert N(1.0, 2.0, 0.0) == 0.0


def test_n_symmetric():
    assert N(1.0, 3.0, 0.5) == pytest.approx(N(3.0, 1.0, 0.5), abs=1e-9)
    assert N(0.5, 2.0, 0.2 + 0.1j) == pytest.approx(N(2.0, 0.5, 0.2 + 0.1j), abs=1e-9)


def test_n_decays_for_large_momenta():
    small = abs(N(0.0, 0.0, 0.5))
    assert abs(N(1e4, 1e4, 0.5)) < 1e-2 * max(small, 1e-3)


def test_n_grid_matches_pointwise():
    a = np.array([0.0, 1.0, 2.0])
    b = np.array([[0.5], [4.0]])
    values, errors = n_integral(a, b, 0.5)
    assert values.shape == (2, 3)
    assert values[1, 2] == pytest.approx(N(2.0, 4.0, 0.5), abs=1e-13)
    assert np.all(errors >= 0)


def test_n_domain():
    with pytest.raises(DomainError):
        N(1.0, 1.0, -0.73)
    with pytest.raises(BoundaryError):
        N(1.0, 1.0, -1.0 / math.log(4.0))
    with pytest.raises(DomainError):
        N(-1.0, 1.0, 0.5)


def test_g_free_propagator():
    value = G(EvalPoint(a=0.0, b=0.0, lam=0.0))
    assert value.g == 1.0
    assert value.n_value == 0.0
    g, _, _ = G_array(np.array([1.0, 2.0]), np.array([3.0, 0.5]), 0.0)
    np.testing.assert_allclose(g, [1 / 5.0, 1 / 3.5], rtol=1e-15)


def test_g_at_unit_coupling_origin():
    # both Lambert factors are W_0(e) = 1
    value = G(EvalPoint(a=0.0, b=0.0, lam=1.0))
    assert value.factor_a == pytest.approx(1.0, rel=1e-14)
    assert value.g == pytest.approx(math.exp(value.n_value), rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, -0.5, 0.2 + 0.1j])
def test_g_symmetric(lam):
    left = G_array(1.0, 4.0, lam)[0]
    right = G_array(4.0, 1.0, lam)[0]
    assert left == pytest.approx(right, abs=1e-9)


@pytest.mark.parametrize("lam", [0.25, 1.0, -0.5, -0.7])
def test_g_positive_on_real_axis(lam):
    a = np.array([0.0, 0.5, 1.0, 2.0, 4.0, 100.0])
    g, _, _ = G_array(a[:, None], a[None, :], lam)
    assert np.all(g > 0)


def test_g_complex_coupling_is_complex():
    value = G(EvalPoint(a=1.0, b=1.0, lam=ComplexVal(re=0.3, im=0.2)))
    assert isinstance(value.g, ComplexVal)
    assert value.g.im != 0


def test_g_small_coupling_matches_second_order():
    lam = 1e-3
    c0, c1, c2 = G_series2(1.0, 2.0)
    assert G_array(1.0, 2.0, lam)[0] == pytest.approx(c0 + c1 * lam + c2 * lam**2, abs=1e-8)


def test_g_hilbert_agrees(spec):
    assert G_hilbert(1.0, 2.0, 0.5, spec) == pytest.approx(G_array(1.0, 2.0, 0.5)[0], abs=1e-5)
    assert G_hilbert(1.0, 2.0, 0.5, spec) == pytest.approx(G_hilbert(2.0, 1.0, 0.5, spec), abs=1e-5)


def test_g_hilbert_domain():
    with pytest.raises(DomainError):
        G_hilbert(1.0, 1.0, -0.5)
    with pytest.raises(DomainError):
        G_hilbert(0.0, 0.0, 0.5)


@pytest.mark.parametrize("a, b, lam", [(0.0, 0.0, 1.0), (2.0, 3.0, 0.5), (1.0, 0.0, 2.0)])
def test_g_alt_agrees(spec, a, b, lam):
    assert G_alt(a, b, lam, spec) == pytest.approx(G_array(a, b, lam)[0], abs=1e-4)


def test_g_alt_rejects_negative_coupling():
    with pytest.raises(DomainError):
        G_alt(1.0, 1.0, -0.3)


def test_lambert_factor_matches_real_branch():
    a, lam = 2.0, 0.5
    expected = lam * lambert_w_real(0, math.exp((1 + a) / lam) / lam)
    assert lambert_factor(a, lam) == pytest.approx(expected, rel=1e-13)
