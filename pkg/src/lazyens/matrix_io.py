"""Matrix JSON format: ``{"n": int, "re": [[...]], "im": [[...]]}``, row-major."""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ValidationError


class MatrixFormatError(ValidationError):
    pass


def _grid(obj: dict, key: str, n: int) -> np.ndarray:
    if key not in obj:
        raise MatrixFormatError(f"missing field '{key}'")
    rows = obj[key]
    if not isinstance(rows, list) or len(rows) != n:
        raise MatrixFormatError(f"field '{key}' must be a list of {n} rows")
    out = np.empty((n, n))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise MatrixFormatError(f"field '{key}' row {i} must have {n} entries")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise MatrixFormatError(f"field '{key}'[{i}][{j}] is not a finite number: {v!r}")
            out[i, j] = v
    return out


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix must be a JSON object with fields 'n', 're', 'im'")
    n = obj.get("n")
    if "n" not in obj:
        raise MatrixFormatError("missing field 'n'")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise MatrixFormatError(f"field 'n' must be a positive integer, got {n!r}")
    re = _grid(obj, "re", n)
    im = _grid(obj, "im", n)
    return re + 1j * im


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"n": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def load_matrix(path) -> np.ndarray:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: invalid JSON ({exc})") from exc
    return matrix_from_json(obj)


def save_matrix(path, m) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(m), fh)
