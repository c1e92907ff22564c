"""
CLI subcommands.

Each module registers its parser with add_parser() and implements
run(config) -> CommandOutput. main.py dispatches on RunConfig.command.
"""

import argparse

from phi4lambert.exceptions import ConfigError


def parse_number(text: str) -> float | complex:
    """A real number, or a complex one written like 0.5+0.1j."""
    try:
        value = complex(text.replace(" ", ""))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from e
    return value.real if value.imag == 0 else value


def parse_range(text: str) -> tuple[float, float, int]:
    """start:stop:count for grid sweeps."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from e
    if count < 1:
        raise argparse.ArgumentTypeError("count must be at least 1")
    return start, stop, count


def require(params: dict, *names: str) -> None:
    missing = [name for name in names if params.get(name) is None]
    if missing:
        raise ConfigError("missing parameters", details={"missing": missing})
