"""
curves: sampled boundary curves of the holomorphicity domains.
"""

import argparse

import numpy as np

from phi4lambert.commands import require
from phi4lambert.exceptions import ConfigError
from phi4lambert.schemas import CommandOutput, CurveSample, RunConfig
from phi4lambert.services.domains import cochleoid, cochleoid_cut_mask, critical_curve, envelope, n_lambda_curve
from phi4lambert.services.formatting import render

CURVES = ("critical", "cochleoid", "envelope", "Nlambda")


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("curves", parents=parents, help="Emit boundary curves (CSV by default)")
    parser.add_argument("--which", choices=CURVES, required=True)
    parser.add_argument("--a", type=float, default=0.0, help="Momentum for the cochleoid")
    parser.add_argument("--lambda", dest="lam", type=float, default=0.5, help="Coupling for Nlambda")
    parser.add_argument("--samples", type=int, default=None, help="Points per curve")


def _rows(samples: list[CurveSample]) -> list[list]:
    return [[s.param, s.point.re, s.point.im, s.curve_id] for s in samples]


def run(config: RunConfig) -> CommandOutput:
    params = config.params
    require(params, "which")
    which, n = params["which"], params.get("samples")
    header = ["param", "re", "im", "curve_id"]
    metadata: dict = {"curve": which}

    if which == "critical":
        rows = _rows(critical_curve(n=n))
    elif which == "cochleoid":
        a = params.get("a", 0.0)
        samples = cochleoid(a, n=n)
        cut = cochleoid_cut_mask(a, np.array([s.param for s in samples]))
        rows = [row + [bool(flag)] for row, flag in zip(_rows(samples), cut, strict=True)]
        header.append("cut")
        metadata["a"] = a
    elif which == "envelope":
        t_e, psi, samples = envelope(n=n)
        rows = _rows(samples)
        metadata.update({"t_E": t_e, "psi": psi})
    elif which == "Nlambda":
        lam = params.get("lam", 0.5)
        rows = _rows(n_lambda_curve(lam, n=n))
        metadata["lambda"] = lam
    else:
        raise ConfigError("unknown curve", details={"which": which, "choices": list(CURVES)})

    return CommandOutput(text=render(config.format or "csv", "curves", header, rows, metadata=metadata))
