import math

import pytest
from pydantic import ValidationError

from phi4lambert.schemas import (
    ComplexVal,
    EvalPoint,
    GridFunction,
    IdentityCheck,
    IdentityId,
    RunConfig,
    SeriesCoeffs,
    StirlingTable,
    as_number,
    to_number,
)


def test_complex_val_round_trip():
    z = ComplexVal.of(0.5 - 2j)
    assert z.to_complex() == 0.5 - 2j
    assert ComplexVal.of(3.0).im == 0.0


def test_complex_val_rejects_non_finite():
    with pytest.raises(ValidationError):
        ComplexVal(re=math.nan, im=0.0)


def test_number_wrapping():
    assert to_number(0.25) == 0.25
    assert isinstance(to_number(1 + 1j), ComplexVal)
    assert as_number(to_number(1 + 1j)) == 1 + 1j
    assert as_number(2.0) == 2.0


@pytest.mark.parametrize("a, b", [(-1.0, 0.0), (0.0, -1e-3), (math.inf, 0.0)])
def test_eval_point_rejects_bad_arguments(a, b):
    with pytest.raises(ValidationError):
        EvalPoint(a=a, b=b, lam=0.5)


def test_eval_point_complex_coupling():
    point = EvalPoint(a=1.0, b=2.0, lam=ComplexVal.of(0.5 + 0.1j))
    assert as_number(point.lam) == 0.5 + 0.1j


def test_stirling_table_shape():
    StirlingTable(max_n=1, values=[[1], [0, 1]])
    with pytest.raises(ValidationError):
        StirlingTable(max_n=2, values=[[1], [0, 1]])
    with pytest.raises(ValidationError):
        StirlingTable(max_n=1, values=[[1], [0]])


def test_series_coeffs_length():
    with pytest.raises(ValidationError):
        SeriesCoeffs(coeffs=[1.0, 2.0], order=2, eval_a=0.0)


def _grid(values):
    return GridFunction(cutoff=10.0, nodes=[1.0, 2.0], weights=[0.5, 0.5], values=values)


def test_grid_function_accepts_symmetric():
    grid = _grid([[1.0, 0.5], [0.5, 0.25]])
    assert grid.as_array().shape == (2, 2)


@pytest.mark.parametrize(
    "values",
    [
        [[1.0, 0.5], [0.4, 0.25]],
        [[1.0, math.nan], [math.nan, 0.25]],
        [[1.0, 0.5]],
    ],
)
def test_grid_function_rejects(values):
    with pytest.raises(ValidationError):
        _grid(values)


def test_grid_function_nodes_increasing():
    with pytest.raises(ValidationError):
        GridFunction(cutoff=10.0, nodes=[2.0, 1.0], weights=[0.5, 0.5], values=[[1.0, 0.5], [0.5, 1.0]])


def test_identity_check_pass_and_expected_failure():
    base = {"identity_id": IdentityId.J1, "lhs": 1.0, "rhs": 1.0, "tolerance": 1e-8}
    assert IdentityCheck(residual=1e-10, **base).passed
    assert not IdentityCheck(residual=1e-6, **base).passed
    assert IdentityCheck(residual=1e-6, expect_fail=True, **base).passed
    assert not IdentityCheck(residual=1e-10, expect_fail=True, **base).passed


def test_run_config_tolerances_positive():
    RunConfig(command="oracle", params={"tol": 1e-9, "lam": 0.5})
    RunConfig(command="oracle", params={"tol": None})
    with pytest.raises(ValidationError):
        RunConfig(command="oracle", params={"tol": 0.0})


def test_run_config_unknown_command():
    with pytest.raises(ValidationError):
        RunConfig(command="plot")
