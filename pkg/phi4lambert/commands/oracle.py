"""
oracle: finite-cutoff fixed-point solutions against the closed form.
"""

import argparse
from pathlib import Path

from phi4lambert.commands import require
from phi4lambert.logger import get_logger
from phi4lambert.schemas import CommandOutput, RunConfig
from phi4lambert.services.formatting import dumps_json, render
from phi4lambert.services.oracle import closed_form_deviation, refined_residual, solve_fixed_point

logger = get_logger(__name__)

HEADER = ["cutoff", "nodes", "iterations", "residual", "refined_residual", "max_deviation"]


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("oracle", parents=parents, help="Solve the finite-cutoff equation and compare")
    parser.add_argument("--lambda", dest="lam", type=float, required=True, help="Real coupling")
    parser.add_argument("--cutoff", type=float, nargs="+", required=True, help="One or more Lambda^2")
    parser.add_argument("--nodes", type=int, default=64, help="Grid size per axis")
    parser.add_argument("--damping", type=float, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    parser.add_argument("--grid-out", dest="grid_out", type=Path, default=None, help="CSV for the last grid")


def run(config: RunConfig) -> CommandOutput:
    """
    Solve at each cutoff and report convergence, the refined-grid residual
    and the deviation from the closed form on the interior nodes.
    """
    params = config.params
    require(params, "lam", "cutoff")
    lam, nodes = params["lam"], params.get("nodes", 64)

    rows = []
    solution = None
    for cutoff in params["cutoff"]:
        solution = solve_fixed_point(
            lam,
            cutoff,
            nodes,
            damping=params.get("damping"),
            tol=params.get("tol"),
            max_iter=params.get("max_iter"),
        )
        deviation, _ = closed_form_deviation(solution)
        rows.append(
            [cutoff, nodes, solution.iterations, solution.residual, refined_residual(solution, lam), deviation]
        )

    deviations = [row[5] for row in rows]
    monotone = all(later <= earlier for earlier, later in zip(deviations, deviations[1:]))
    if not monotone:
        logger.warning(f"Deviation from the closed form does not decrease: {deviations}")

    grid_out: Path | None = params.get("grid_out")
    if grid_out is not None and solution is not None:
        grid_out.parent.mkdir(parents=True, exist_ok=True)
        grid_out.write_text(solution.to_csv(), encoding="utf-8")
        grid_out.with_suffix(".json").write_text(dumps_json(solution.to_sidecar()) + "\n", encoding="utf-8")
        logger.info(f"Wrote grid to {grid_out}")

    text = render(
        config.format or "table",
        "oracle",
        HEADER,
        rows,
        metadata={"lambda": lam, "monotone": monotone},
    )
    return CommandOutput(text=text)
