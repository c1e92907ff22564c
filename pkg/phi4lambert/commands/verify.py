"""
verify: run identity checks; the exit status is 1 unless every check passes.
"""

import argparse

from phi4lambert.exception_handlers import EXIT_OK, EXIT_VERIFY_FAILED
from phi4lambert.exceptions import ConfigError
from phi4lambert.logger import get_logger
from phi4lambert.schemas import CommandOutput, IdentityCheck, IdentityId, QuadSpec, RunConfig
from phi4lambert.services.formatting import render
from phi4lambert.services.identities import run_suite

logger = get_logger(__name__)

HEADER = ["identity_id", "params", "lhs", "rhs", "residual", "tolerance", "pass"]


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("verify", parents=parents, help="Check the Lambert-function identities")
    parser.add_argument(
        "--suite",
        nargs="+",
        default=["all"],
        help="'all' or identity ids: " + ", ".join(i.value for i in IdentityId),
    )


def _selected(names: list[str]) -> list[IdentityId]:
    if "all" in names:
        return list(IdentityId)
    try:
        return [IdentityId(name) for name in names]
    except ValueError as e:
        raise ConfigError("unknown identity id", details={"suite": names, "error": str(e)}) from e


def _record(result: IdentityCheck) -> dict:
    return {
        "identity_id": result.identity_id,
        "params": result.inputs,
        "lhs": result.lhs,
        "rhs": result.rhs,
        "residual": result.residual,
        "tolerance": result.tolerance,
        "pass": result.passed,
    }


def run(config: RunConfig) -> CommandOutput:
    ids = _selected(config.params.get("suite") or ["all"])
    results = run_suite(ids, QuadSpec.from_settings())
    records = [_record(r) for r in results]
    rows = [[rec[key] for key in HEADER] for rec in records]
    passed = all(r.passed for r in results)
    if not passed:
        failing = sorted({r.identity_id.value for r in results if not r.passed})
        logger.warning(f"Identity checks failed: {failing}")

    text = render(
        config.format or "table",
        "verify",
        HEADER,
        rows,
        metadata={"checks": len(results), "all_passed": passed},
        payload=records,
    )
    return CommandOutput(text=text, exit_code=EXIT_OK if passed else EXIT_VERIFY_FAILED)
