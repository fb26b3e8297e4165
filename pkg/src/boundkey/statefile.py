"""JSON state files.

Schema (``format`` 1)::

    {
      "format": 1,
      "order": "A,B,A',B'",
      "dims": [2, 2, d, d],
      "matrix": [[[re, im], ...], ...],   # row-major, side 4 d^2
      "metadata": {...}                   # class id, params, generator
    }

Floats are written with Python's shortest round-trip repr, so
parse(serialize(x)) reproduces every finite value bit for bit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .linops import Operator

FORMAT_VERSION = 1
ORDER_TAG = "A,B,A',B'"


class StateFileError(ValueError):
    pass


def matrix_to_pairs(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise StateFileError("matrix has non-finite entries")
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def pairs_to_matrix(pairs) -> np.ndarray:
    try:
        arr = np.array(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFileError(f"matrix is not a nested [re, im] array: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise StateFileError(f"matrix has shape {arr.shape}, expected (n, n, 2)")
    return arr[..., 0] + 1j * arr[..., 1]


def to_dict(rho: Operator, metadata: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        "format": FORMAT_VERSION,
        "order": ORDER_TAG,
        "dims": list(rho.dims),
        "matrix": matrix_to_pairs(rho.data),
        "metadata": metadata or {},
    }


def from_dict(doc: dict[str, Any]) -> tuple[Operator, dict[str, Any]]:
    if not isinstance(doc, dict):
        raise StateFileError("state file must hold a JSON object")
    if doc.get("format") != FORMAT_VERSION:
        raise StateFileError(f"unsupported format {doc.get('format')!r}")
    if doc.get("order") != ORDER_TAG:
        raise StateFileError(f"unexpected factor order {doc.get('order')!r}")
    dims = doc.get("dims")
    if not isinstance(dims, list) or len(dims) != 4 or dims[:2] != [2, 2] or dims[2] != dims[3]:
        raise StateFileError(f"dims must be [2, 2, d, d], got {dims!r}")
    data = pairs_to_matrix(doc.get("matrix"))
    try:
        rho = Operator(data, tuple(dims))
    except ValueError as exc:
        raise StateFileError(str(exc)) from exc
    return rho, doc.get("metadata", {})


def dumps(rho: Operator, metadata: dict[str, Any] | None = None) -> str:
    return json.dumps(to_dict(rho, metadata), allow_nan=False)


def loads(text: str) -> tuple[Operator, dict[str, Any]]:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"invalid JSON: {exc}") from exc
    return from_dict(doc)


def _reject_constant(name):
    raise StateFileError(f"non-finite value {name} in state file")


def save(path: str | Path, rho: Operator, metadata: dict[str, Any] | None = None) -> None:
    Path(path).write_text(dumps(rho, metadata))


def load(path: str | Path) -> tuple[Operator, dict[str, Any]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def jsonable(x):
    """Recursively turn numpy scalars / complex numbers into JSON values."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x
