"""
eval: the closed-form 2-point function at one point or on a grid.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from phi4lambert.commands import parse_number, parse_range, require
from phi4lambert.config import get_settings
from phi4lambert.logger import get_logger
from phi4lambert.schemas import CommandOutput, EvalPoint, GValue, RunConfig, to_number
from phi4lambert.services.closedform import G
from phi4lambert.services.formatting import render

logger = get_logger(__name__)

HEADER = ["a", "b", "lambda", "G", "N", "factor_a", "factor_b", "err_estimate"]


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("eval", parents=parents, help="Evaluate G_lambda(a, b)")
    parser.add_argument("a", type=float, nargs="?", help="First argument (ignored with --grid)")
    parser.add_argument("b", type=float, nargs="?", help="Second argument (ignored with --grid)")
    parser.add_argument("lam", type=parse_number, metavar="lambda", help="Coupling, real or complex (0.5+0.1j)")
    parser.add_argument(
        "--grid",
        nargs=2,
        type=parse_range,
        metavar=("A0:A1:N", "B0:B1:N"),
        help="Sweep a rectangular (a, b) grid",
    )


def _row(point: EvalPoint) -> list:
    value: GValue = G(point)
    return [point.a, point.b, point.lam, value.g, value.n_value, value.factor_a, value.factor_b, value.err_estimate]


def run(config: RunConfig) -> CommandOutput:
    """
    Evaluate G with its ingredients. On a grid, rows come out in row-major
    (a, b) order whether or not a thread pool is used.
    """
    params = config.params
    lam = to_number(params["lam"])
    grid = params.get("grid")
    if grid:
        (a0, a1, na), (b0, b1, nb) = grid
        points = [EvalPoint(a=a, b=b, lam=lam) for a in np.linspace(a0, a1, na) for b in np.linspace(b0, b1, nb)]
    else:
        require(params, "a", "b")
        points = [EvalPoint(a=params["a"], b=params["b"], lam=lam)]

    threads = get_settings().threads
    logger.info(f"Evaluating G at {len(points)} point(s) with {threads or 1} worker(s)")
    if threads and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_row, points))
    else:
        rows = [_row(point) for point in points]

    text = render(config.format or "table", "eval", HEADER, rows, metadata={"points": len(rows)})
    return CommandOutput(text=text)
