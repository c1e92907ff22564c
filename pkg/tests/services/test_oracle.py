import math

import numpy as np
import pytest

from phi4lambert.config import get_settings
from phi4lambert.exceptions import DomainError, FixedPointError
from phi4lambert.schemas import GridFunction
from phi4lambert.services import oracle as oracle_service
from phi4lambert.services.oracle import (
    closed_form_deviation,
    closed_form_two_point,
    compare_oracle_to_closedform,
    fixed_point_map,
    probe_initial_conditions,
    pv_grid,
    refined_residual,
    residual,
    solve_fixed_point,
)


@pytest.fixture(scope="module")
def converged() -> GridFunction:
    return solve_fixed_point(0.5, 100.0, n_nodes=64, tol=1e-9)


def test_pv_grid_layout():
    grid = pv_grid(25.0, 32)
    assert grid.size == 32
    assert np.all(np.diff(grid.nodes) > 0)
    assert 0 < grid.nodes[0] and grid.nodes[-1] < 25.0
    assert grid.weights.sum() == pytest.approx(25.0, rel=1e-12)
    assert grid.mu2 == 1.0


def test_pv_grid_constants_row():
    grid = pv_grid(25.0, 32)
    np.testing.assert_allclose(grid.pv @ np.ones(grid.size), grid.ell, atol=1e-10)


def test_pv_grid_transform_of_known_function():
    cutoff = 25.0
    grid = pv_grid(cutoff, 64)
    x = grid.nodes
    expected = np.log((cutoff - x) / (x * (1.0 + cutoff))) / (1.0 + x)
    np.testing.assert_allclose(grid.pv @ (1.0 / (1.0 + x)), expected, atol=1e-8)


def test_pv_grid_bare_mass():
    assert pv_grid(100.0, 16, 0.5).mu2 == pytest.approx(1.0 - math.log(101.0))


def test_pv_grid_rejects_small_grids():
    with pytest.raises(DomainError):
        pv_grid(25.0, 8)
    with pytest.raises(DomainError):
        pv_grid(-1.0, 32)


def test_free_solution_is_exact():
    solution = solve_fixed_point(0.0, 25.0, n_nodes=32)
    x = np.asarray(solution.nodes)
    assert solution.iterations == 1
    np.testing.assert_allclose(solution.as_array(), 1.0 / (1.0 + x[:, None] + x[None, :]), rtol=1e-15)


def test_fixed_point_converges(converged):
    assert converged.residual <= 1e-9
    grid = pv_grid(100.0, 64, 0.5)
    values = converged.as_array()
    assert float(np.max(np.abs(fixed_point_map(values, 0.5, grid) - values))) <= 1e-8


def test_fixed_point_symmetric_and_positive(converged):
    values = converged.as_array()
    np.testing.assert_array_equal(values, values.T)
    assert np.all(values > 0)
    assert converged.lam == 0.5
    assert converged.tol == 1e-9


def test_refined_residual():
    free = solve_fixed_point(0.0, 25.0, n_nodes=32)
    assert refined_residual(free, 0.0) <= 1e-10


def test_refined_residual_monitors_discretization(converged):
    assert 0 <= refined_residual(converged, 0.5) <= 1e-2


def test_grid_csv_round_trip(converged):
    restored = GridFunction.from_csv(converged.to_csv(), converged.to_sidecar())
    assert restored == converged


def test_initial_conditions_agree():
    agree, spread = probe_initial_conditions(0.5, 25.0, n_nodes=32)
    assert agree
    assert spread <= 1e-8


def test_default_damping_converges_on_reference_grid():
    settings = get_settings()
    solution = solve_fixed_point(0.5, 100.0, n_nodes=64)
    assert solution.residual <= settings.oracle_tol
    assert solution.iterations < settings.oracle_max_iter


def test_sporadic_growth_keeps_damping(monkeypatch):
    # update norms 0.1, 0.11, 0.05, 0.055, ...: shrinking overall with an uptick every other step
    steps = [0.1 * 0.5 ** (n // 2) * (1.1 if n % 2 else 1.0) for n in range(80)]
    calls = iter(steps)
    monkeypatch.setattr(oracle_service, "fixed_point_map", lambda values, lam, grid: values + next(calls))
    solution = solve_fixed_point(0.5, 25.0, n_nodes=16, damping=0.2, tol=1e-9)
    x = np.asarray(solution.nodes)
    applied = sum(steps[: solution.iterations - 1])
    np.testing.assert_allclose(solution.as_array(), 1.0 / (1.0 + x[:, None] + x[None, :]) + 0.2 * applied, rtol=1e-12)


def test_sustained_growth_halves_damping(monkeypatch):
    steps = [1e-3 * 1.01**n for n in range(6)] + [1e-12]
    calls = iter(steps)
    monkeypatch.setattr(oracle_service, "fixed_point_map", lambda values, lam, grid: values + next(calls))
    solution = solve_fixed_point(0.5, 25.0, n_nodes=16, damping=0.2, tol=1e-9)
    assert solution.iterations == 7
    x = np.asarray(solution.nodes)
    # five increases in a row: the sixth step goes in at half damping
    applied = 0.2 * sum(steps[:5]) + 0.1 * steps[5]
    np.testing.assert_allclose(solution.as_array(), 1.0 / (1.0 + x[:, None] + x[None, :]) + applied, rtol=1e-12)


def test_fixed_point_gives_up():
    with pytest.raises(FixedPointError) as excinfo:
        solve_fixed_point(0.5, 25.0, n_nodes=32, max_iter=2)
    assert excinfo.value.details["max_iter"] == 2


def test_fixed_point_domain():
    with pytest.raises(DomainError):
        solve_fixed_point(-0.75, 25.0)
    with pytest.raises(DomainError):
        solve_fixed_point(0.5, 25.0, damping=1.5)
    with pytest.raises(DomainError):
        solve_fixed_point(0.5, 25.0, n_nodes=32, initial=np.ones((3, 3)))


def test_deviation_vanishes_without_coupling():
    for cutoff, deviation in compare_oracle_to_closedform(0.0, [25.0, 100.0], n_nodes=32):
        assert deviation == pytest.approx(0.0, abs=1e-14)


def test_closed_form_deviation_counts_interior(converged):
    deviation, count = closed_form_deviation(converged)
    assert 0 < count < len(converged.nodes)
    assert np.all(np.asarray(converged.nodes[:count]) <= 25.0)
    assert deviation < 0.5


def test_residual_of_free_propagator():
    report = residual(lambda a, b: 1.0 / (1.0 + np.asarray(a) + np.asarray(b)), 1.0, 2.0, 0.0)
    assert report.abs_residual == 0.0
    assert report.lhs == 1.0
    assert report.tail_estimate == 0.0


def test_residual_domain():
    with pytest.raises(DomainError):
        residual(closed_form_two_point(0.5), -1.0, 1.0, 0.5)


def test_residual_of_closed_form():
    report = residual(closed_form_two_point(0.5), 1.0, 1.0, 0.5)
    assert report.rel_residual <= 1e-4
    assert report.abs_residual == pytest.approx(abs(report.lhs - report.rhs))


def test_residual_detects_wrong_function():
    report = residual(lambda a, b: 1.0 / (1.0 + np.asarray(a) + np.asarray(b)), 1.0, 1.0, 0.5)
    assert report.rel_residual > 1e-2


@pytest.mark.slow
@pytest.mark.parametrize("lam", [0.25, 0.5, 1.0, 2.0, -0.5, -0.7])
def test_closed_form_solves_the_equation(lam):
    g = closed_form_two_point(lam)
    for a in (0.0, 0.5, 1.0, 2.0, 4.0):
        for b in (0.0, 0.5, 1.0, 2.0, 4.0):
            report = residual(g, a, b, lam)
            assert report.rel_residual <= 1e-4, (a, b)


@pytest.mark.slow
def test_oracle_approaches_closed_form():
    results = compare_oracle_to_closedform(0.5, [25.0, 100.0, 400.0], n_nodes=64)
    deviations = [deviation for _, deviation in results]
    assert deviations[0] > deviations[1] > deviations[2]
    assert deviations[-1] <= 5e-2


@pytest.mark.slow
def test_oracle_weak_coupling_large_cutoff():
    [(_, deviation)] = compare_oracle_to_closedform(0.25, [400.0], n_nodes=128)
    assert deviation <= 5e-2
