"""
series: lambda-expansion coefficients from two independent routes.

With --at a the coefficients of I_lambda(a) from the Stirling-number
formula are set against the Lagrange-Buermann derivative form. With
--at a,b the contour-extracted coefficients of G are set against the
exact expansion up to second order.
"""

import argparse

from phi4lambert.commands import require
from phi4lambert.exceptions import ConfigError
from phi4lambert.logger import get_logger
from phi4lambert.schemas import CommandOutput, RunConfig
from phi4lambert.services.domains import joint_radius
from phi4lambert.services.formatting import render
from phi4lambert.services.series import (
    G_lambda_coeffs,
    G_series2,
    I_coeffs_conjecture,
    I_coeffs_derivative_form,
    radius_estimate,
)

logger = get_logger(__name__)


def _point(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected a or a,b, got {text!r}") from e
    if len(values) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected a or a,b, got {text!r}")
    return values


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("series", parents=parents, help="Perturbative coefficients and their cross-check")
    parser.add_argument("--order", type=int, required=True, help="Highest power of lambda")
    parser.add_argument("--at", type=_point, required=True, metavar="a[,b]", help="Expansion point")
    parser.add_argument("--radius", type=float, default=0.3, help="Contour radius for the G coefficients")


def _one_point(a: float, order: int, fmt: str) -> str:
    stirling = I_coeffs_conjecture(a, order).coeffs
    lagrange = I_coeffs_derivative_form(a, order).coeffs
    rows = [[n, s, d, abs(s - d)] for n, (s, d) in enumerate(zip(stirling, lagrange, strict=True))]
    discrepancy = max(row[3] for row in rows)
    logger.info(f"I_lambda({a:g}) coefficients agree to {discrepancy:.3e}")
    return render(
        fmt,
        "series",
        ["order", "stirling", "derivative_form", "abs_diff"],
        rows,
        metadata={"a": a, "max_discrepancy": discrepancy},
    )


def _two_points(a: float, b: float, order: int, radius: float, fmt: str) -> str:
    contour = G_lambda_coeffs(a, b, order, h=radius).coeffs
    exact = G_series2(a, b)
    rows = []
    for n, c in enumerate(contour):
        reference = exact[n] if n < len(exact) else None
        rows.append([n, c, reference, abs(c - reference) if reference is not None else None])
    discrepancy = max(row[3] for row in rows if row[3] is not None)
    metadata: dict = {"a": a, "b": b, "max_discrepancy": discrepancy}
    if order >= 6:
        metadata["radius_estimate"] = radius_estimate(contour)
        metadata["joint_radius"] = joint_radius()
    return render(fmt, "series", ["order", "contour", "exact", "abs_diff"], rows, metadata=metadata)


def run(config: RunConfig) -> CommandOutput:
    params = config.params
    require(params, "order", "at")
    order = params["order"]
    if order < 0:
        raise ConfigError("order must be non-negative", details={"order": order})
    fmt = config.format or "table"
    at = params["at"]
    if len(at) == 1:
        return CommandOutput(text=_one_point(at[0], order, fmt))
    return CommandOutput(text=_two_points(at[0], at[1], order, params.get("radius", 0.3), fmt))
