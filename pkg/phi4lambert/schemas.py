"""
Pydantic Schemas

These models define the records that go in and out of the services and the
CLI. They validate ranges at the boundary and serialize to JSON/CSV.
"""

import csv
import io
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from phi4lambert.config import get_settings

if sys.version_info >= (3, 11):
    from enum import StrEnum
else:  # Python 3.10: same str()/format() behaviour as enum.StrEnum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

# Branch label of the Lambert function; any integer is a valid label.
BranchIndex = Annotated[int, Field(description="Branch label k of W_k")]


class ComplexVal(BaseModel):
    """A finite complex number (re, im)."""

    re: float = Field(..., description="Real part")
    im: float = Field(0.0, description="Imaginary part")

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"re": 0.5671432904097838, "im": 0.0}},
    )

    @field_validator("re", "im")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("complex components must be finite")
        return value

    @classmethod
    def of(cls, z: complex | float) -> "ComplexVal":
        z = complex(z)
        return cls(re=z.real, im=z.imag)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


Number = float | ComplexVal


def as_number(value: Number) -> float | complex:
    """Unwrap a schema number into a Python float or complex."""
    if isinstance(value, ComplexVal):
        return value.to_complex()
    return float(value)


def to_number(value: float | complex) -> Number:
    """Wrap a Python number for a schema field (real values stay float)."""
    if isinstance(value, complex) or np.iscomplexobj(value):
        return ComplexVal.of(complex(value))
    return float(value)


class QuadSpec(BaseModel):
    """Tolerances and limits for one quadrature call."""

    abs_tol: float = Field(1e-10, gt=0, description="Absolute error target")
    rel_tol: float = Field(1e-10, gt=0, description="Relative error target")
    max_subdivisions: int = Field(2000, ge=1, description="Adaptive subdivision limit")
    tail_cutoff: float = Field(
        1e4, gt=0, description="Split point for semi-infinite integrals"
    )

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "abs_tol": 1e-10,
                "rel_tol": 1e-10,
                "max_subdivisions": 2000,
                "tail_cutoff": 1e4,
            }
        },
    )

    @classmethod
    def from_settings(cls) -> "QuadSpec":
        settings = get_settings()
        return cls(
            abs_tol=settings.quad_abs_tol,
            rel_tol=settings.quad_rel_tol,
            max_subdivisions=settings.quad_max_subdivisions,
            tail_cutoff=settings.quad_tail_cutoff,
        )


class QuadResult(BaseModel):
    """Value of an integral with its error estimate."""

    value: Number = Field(..., description="Integral value (real or complex)")
    err_estimate: float = Field(..., ge=0, description="Estimated absolute error")
    subdivisions_used: int = Field(0, ge=0, description="Subintervals used")

    model_config = ConfigDict(frozen=True)

    @property
    def number(self) -> float | complex:
        return as_number(self.value)


class EvalPoint(BaseModel):
    """A point (a, b, lambda) at which the 2-point function is evaluated."""

    a: float = Field(..., ge=0, description="First momentum argument")
    b: float = Field(..., ge=0, description="Second momentum argument")
    lam: Number = Field(..., description="Coupling, real or complex")

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"a": 1.0, "b": 2.0, "lam": 0.5}},
    )

    @field_validator("a", "b")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("arguments must be finite")
        return value


class GValue(BaseModel):
    """Closed-form 2-point function together with its ingredients."""

    g: Number = Field(..., description="G_lambda(a,b)")
    n_value: Number = Field(..., description="N_lambda(a,b) used in G")
    err_estimate: float = Field(..., ge=0, description="Propagated error estimate")
    factor_a: Number = Field(..., description="a + lambda W(e^((1+b)/lambda)/lambda)")
    factor_b: Number = Field(..., description="b + lambda W(e^((1+a)/lambda)/lambda)")

    model_config = ConfigDict(frozen=True)


class StirlingTable(BaseModel):
    """Signed Stirling numbers of the first kind s_{n,k}, 0 <= k <= n <= max_n."""

    max_n: int = Field(..., ge=1)
    values: list[list[int]] = Field(..., description="Row n holds s_{n,0..n}")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _shape(self) -> "StirlingTable":
        if len(self.values) != self.max_n + 1:
            raise ValueError("table must have max_n + 1 rows")
        for n, row in enumerate(self.values):
            if len(row) != n + 1:
                raise ValueError(f"row {n} must have {n + 1} entries")
        return self


class SeriesCoeffs(BaseModel):
    """Coefficients of a power series in lambda, index = power."""

    coeffs: list[float] = Field(..., description="c_0 .. c_order")
    order: int = Field(..., ge=0)
    eval_a: float = Field(..., description="The a at which coefficients were evaluated")
    eval_b: float | None = Field(None, description="The b, for two-argument series")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _length(self) -> "SeriesCoeffs":
        if len(self.coeffs) != self.order + 1:
            raise ValueError("coeffs must have order + 1 entries")
        return self


class GridFunction(BaseModel):
    """Finite-cutoff discretization of G on [0, cutoff]^2."""

    cutoff: float = Field(..., gt=0, description="Lambda^2")
    nodes: list[float] = Field(..., description="Quadrature nodes in (0, cutoff)")
    weights: list[float] = Field(..., description="Quadrature weights")
    values: list[list[float]] = Field(..., description="G_ij ~ G(node_i, node_j)")
    lam: float = Field(0.0, description="Coupling the grid was solved at")
    tol: float = Field(0.0, ge=0)
    iterations: int = Field(0, ge=0)
    residual: float = Field(0.0, ge=0, description="Last max |G_new - G|")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check(self) -> "GridFunction":
        n = len(self.nodes)
        if len(self.weights) != n or len(self.values) != n:
            raise ValueError("nodes, weights and values must agree in size")
        nodes = np.asarray(self.nodes)
        if n > 1 and not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        values = np.asarray(self.values, dtype=float)
        if values.shape != (n, n):
            raise ValueError("values must be a square matrix")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        scale = max(1.0, float(np.max(np.abs(values)))) if n else 1.0
        if n and float(np.max(np.abs(values - values.T))) > 1e-10 * scale:
            raise ValueError("grid values must be symmetric")
        return self

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def to_csv(self) -> str:
        """Values matrix with the nodes as header row and first column."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["a\\b"] + [format(x, ".17g") for x in self.nodes])
        for node, row in zip(self.nodes, self.values, strict=True):
            writer.writerow([format(node, ".17g")] + [format(v, ".17g") for v in row])
        return buffer.getvalue()

    def to_sidecar(self) -> dict[str, Any]:
        """Metadata that the CSV does not carry."""
        return {
            "lambda": self.lam,
            "cutoff": self.cutoff,
            "tol": self.tol,
            "iterations": self.iterations,
            "residual": self.residual,
            "weights": list(self.weights),
        }

    @classmethod
    def from_csv(cls, text: str, sidecar: dict[str, Any]) -> "GridFunction":
        """Rebuild a grid from to_csv() output and its sidecar."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty grid CSV")
        nodes = [float(x) for x in rows[0][1:]]
        values = [[float(v) for v in row[1:]] for row in rows[1:]]
        return cls(
            cutoff=sidecar["cutoff"],
            nodes=nodes,
            weights=sidecar["weights"],
            values=values,
            lam=sidecar.get("lambda", 0.0),
            tol=sidecar.get("tol", 0.0),
            iterations=sidecar.get("iterations", 0),
            residual=sidecar.get("residual", 0.0),
        )


class ResidualReport(BaseModel):
    """Residual of the integral equation at one point."""

    a: float
    b: float
    lam: float
    lhs: float
    rhs: float
    abs_residual: float = Field(..., ge=0)
    rel_residual: float = Field(..., ge=0)
    tail_estimate: float = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)


class IdentityId(StrEnum):
    L_LAMBERT_INT = "L_LambertInt"
    L_LAMBERT_INT_ARCTAN = "L_Lambert_int"
    K_LAMBERT_INT = "K_Lambert_int"
    J1 = "J1"
    J2 = "J2"
    HT_ARCTAN_LOG = "HTArctanLog"
    LOG_W0_PATH = "logW0_path"
    JNEG_1 = "Jneg_1"
    JNEG_2 = "Jneg_2"
    JNEG_NAIVE = "Jneg_naive"
    COROLLARY_NEG = "CorollaryNeg"
    TRICOMI_18 = "Tricomi18"
    TRICOMI_OUTSIDE = "TricomiOutside"
    TAU_IDENTITY = "TauIdentity"
    STRONG_COUPLING = "StrongCoupling"


class IdentityCheck(BaseModel):
    """Both sides of a numerical identity and their distance."""

    identity_id: IdentityId
    inputs: dict[str, Number] = Field(default_factory=dict)
    lhs: Number
    rhs: Number
    residual: float = Field(..., ge=0)
    tolerance: float = Field(..., gt=0)
    expect_fail: bool = Field(False, description="True for checks that must NOT hold")

    model_config = ConfigDict(frozen=True)

    @property
    def passed(self) -> bool:
        holds = self.residual <= self.tolerance
        return not holds if self.expect_fail else holds


class CurveId(StrEnum):
    C_CRITICAL = "C_critical"
    C_A = "C_a"
    ENVELOPE = "Envelope"
    B_PLUS = "B_plus"
    B_MINUS = "B_minus"
    B_ZERO = "B_zero"
    N_LAMBDA_CURVE = "N_lambda_curve"


class CurveSample(BaseModel):
    """One sampled point of a boundary curve."""

    param: float
    point: ComplexVal
    curve_id: CurveId | None = None

    model_config = ConfigDict(frozen=True)


class RegionVerdict(BaseModel):
    """Membership of a point in a holomorphicity region."""

    inside: bool
    distance_estimate: float = Field(..., ge=0)
    nearest_curve: CurveId
    indeterminate: bool = Field(False, description="Inside the boundary band")

    model_config = ConfigDict(frozen=True)


class Command(StrEnum):
    EVAL = "eval"
    SERIES = "series"
    ORACLE = "oracle"
    VERIFY = "verify"
    CURVES = "curves"


class OutputFormat(StrEnum):
    TABLE = "table"
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """One CLI invocation after argument parsing."""

    command: Command
    params: dict[str, Any] = Field(default_factory=dict)
    output_path: Path | None = None
    format: OutputFormat | None = Field(None, description="None picks the command default")

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "command": "eval",
                "params": {"a": 0.0, "b": 0.0, "lam": 0.0},
                "output_path": None,
                "format": "json",
            }
        },
    )

    @model_validator(mode="after")
    def _tolerances_positive(self) -> "RunConfig":
        for key, value in self.params.items():
            if key.endswith("tol") and value is not None and not value > 0:
                raise ValueError(f"{key} must be positive")
        return self


class CommandOutput(BaseModel):
    """Rendered artifact of one command and the exit status it implies."""

    text: str
    exit_code: int = Field(0, ge=0)

    model_config = ConfigDict(frozen=True)
