"""
Output Formatting Service

Deterministic rendering of results: JSON with 17 significant digits, CSV
with a header row, and aligned text tables with 12 significant digits.
Identical inputs always produce byte-identical output.
"""

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

SCHEMA_VERSION = "phi4-lambert/1"

JSON_DIGITS = 17
TABLE_DIGITS = 12


def to_jsonable(obj: Any) -> Any:
    """
    Convert results into plain JSON-compatible Python values.

    Pydantic models are dumped, complex numbers become {"re", "im"},
    numpy scalars and arrays become floats and lists, enums their values.
    """
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump(mode="python"))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return {"re": z.real, "im": z.imag}
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def format_float(x: float, digits: int) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{digits}g")


def dumps_json(obj: Any) -> str:
    """Serialize with sorted keys and floats at 17 significant digits."""
    return _encode(to_jsonable(obj))


def _encode(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"
        return format_float(value, JSON_DIGITS)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = (f"{json.dumps(k)}: {_encode(value[k])}" for k in sorted(value))
        return "{" + ", ".join(items) + "}"
    if isinstance(value, list):
        return "[" + ", ".join(_encode(v) for v in value) + "]"
    return json.dumps(str(value))


def json_document(kind: str, payload: Any) -> str:
    """Wrap a payload in the versioned top-level envelope."""
    return dumps_json({"schema": SCHEMA_VERSION, "kind": kind, "result": payload}) + "\n"


def csv_document(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Mapping[str, Any] | None = None,
) -> str:
    """
    Render rows as CSV.

    Metadata entries are written first as "# key=value" comment lines,
    sorted by key. Floats use 17 significant digits.
    """
    buffer = io.StringIO()
    for key in sorted(metadata or {}):
        buffer.write(f"# {key}={_cell((metadata or {})[key], JSON_DIGITS)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v, JSON_DIGITS) for v in row])
    return buffer.getvalue()


def table_document(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Human-readable aligned table with 12 significant digits."""
    cells = [list(header)] + [[_cell(v, TABLE_DIGITS) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths, strict=True)) for r in cells]
    return "\n".join(lines) + "\n"


def _cell(value: Any, digits: int) -> str:
    value = to_jsonable(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value, digits)
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        re, im = format_float(value["re"], digits), format_float(abs(value["im"]), digits)
        sign = "-" if value["im"] < 0 else "+"
        return f"{re}{sign}{im}j"
    if value is None:
        return ""
    return str(value)


def write_artifact(text: str, output_path: Path | None) -> None:
    """Write to the given path, or to stdout when no path is set."""
    if output_path is None:
        print(text, end="")
        return
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(text, encoding="utf-8")


def render(
    fmt: str,
    kind: str,
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    metadata: Mapping[str, Any] | None = None,
    payload: Any = None,
) -> str:
    """
    Render one command result in the requested format.

    JSON carries payload when given, otherwise the rows as records keyed by
    header, with the metadata alongside.
    """
    if fmt == "json":
        body = payload if payload is not None else [dict(zip(header, row, strict=True)) for row in rows]
        return json_document(kind, {"metadata": dict(metadata or {}), "records": body})
    if fmt == "csv":
        return csv_document(header, rows, metadata)
    lines = "".join(f"# {key}: {_cell(metadata[key], TABLE_DIGITS)}\n" for key in sorted(metadata or {}))
    return lines + table_document(header, rows)
