"""
Command-line entry point.

    python -m phi4lambert eval 1 2 0.5
    python -m phi4lambert verify --suite all --format json
    python -m phi4lambert curves --which envelope --output envelope.csv
"""

import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from phi4lambert.commands import curves, evaluate, oracle, series, verify
from phi4lambert.config import get_settings
from phi4lambert.exception_handlers import app_exception_handler
from phi4lambert.logger import get_logger, setup_logging
from phi4lambert.schemas import Command, CommandOutput, OutputFormat, RunConfig
from phi4lambert.services.formatting import write_artifact

logger = get_logger(__name__)

COMMANDS: dict[Command, Callable[[RunConfig], CommandOutput]] = {
    Command.EVAL: evaluate.run,
    Command.SERIES: series.run,
    Command.ORACLE: oracle.run,
    Command.VERIFY: verify.run,
    Command.CURVES: curves.run,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)
    common.add_argument("--output", type=Path, default=None, help="Write here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="phi4lambert",
        description="Closed-form 2-point function of the quartic matrix model and its checks",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in (evaluate, series, oracle, verify, curves):
        module.add_parser(subparsers, [common])
    return parser


def to_config(args: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(args).items() if k not in ("command", "format", "output")}
    return RunConfig(command=args.command, params=params, output_path=args.output, format=args.format)


def run(config: RunConfig) -> int:
    """Dispatch one command, write its artifact and return the exit status."""
    logger.info(f"Running {config.command.value} with {config.params}")
    output = COMMANDS[config.command](config)
    write_artifact(output.text, config.output_path)
    return output.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        get_settings()
        setup_logging()
        return run(to_config(args))
    except Exception as exc:
        return app_exception_handler(exc, sys.stderr)
