"""JSON files for matrices, generation records and attack reports.

A matrix file is ``{"n": rows, "m": cols, "rows": [[decimal strings]]}``,
optionally with ``"kind": "basis" | "gram"``. Strings keep big entries
lossless.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from glnz.generators import GenerationRecord
from glnz.linalg import IntegerMatrix, as_matrix

KINDS = ("basis", "gram")


def matrix_to_json(M: IntegerMatrix, kind: str | None = None) -> dict:
    M = np.asarray(M, dtype=object)
    data: dict[str, Any] = {"n": int(M.shape[0]), "m": int(M.shape[1]) if M.ndim == 2 else 0}
    if kind is not None:
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        data["kind"] = kind
    data["rows"] = [[str(int(v)) for v in row] for row in M]
    return data


def matrix_from_json(data: dict) -> tuple[IntegerMatrix, str | None]:
    try:
        n, m, rows = int(data["n"]), int(data["m"]), data["rows"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix document: {exc}") from None
    if len(rows) != n or any(len(row) != m for row in rows):
        raise ValueError(f"matrix document declares {n}x{m} but rows do not match")
    try:
        M = as_matrix([[int(v) for v in row] for row in rows]) if n else np.zeros((0, m), dtype=object)
    except ValueError:
        raise ValueError("matrix entries must be decimal integers") from None
    return M, data.get("kind")


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, compact separators, trailing newline."""
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(dumps(data))


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None


def write_matrix(path: str | Path, M: IntegerMatrix, kind: str | None = None) -> str:
    """Write a matrix file and return the SHA-256 of its bytes."""
    text = dumps(matrix_to_json(M, kind))
    Path(path).write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def read_matrix(path: str | Path) -> tuple[IntegerMatrix, str | None]:
    return matrix_from_json(read_json(path))


def matrix_digest(M: IntegerMatrix) -> str:
    return hashlib.sha256(dumps(matrix_to_json(M)).encode()).hexdigest()


def jsonable(value: Any) -> Any:
    """Plain JSON data; integers beyond 2**53 and matrices become decimal strings."""
    if isinstance(value, np.ndarray):
        return [[str(int(v)) for v in row] for row in value] if value.ndim == 2 else [str(int(v)) for v in value]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        v = int(value)
        return v if abs(v) < 1 << 53 else str(v)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def record_to_json(rec: GenerationRecord) -> dict:
    """Everything about a generation except wall time, so reruns are byte-identical."""
    return {
        "generator": rec.generator,
        "params": jsonable(rec.params),
        "seed": str(rec.seed),
        "n": rec.n,
        "entropy_bits": rec.entropy_bits,
        "matrix_sha256": matrix_digest(rec.matrix),
        "info": jsonable(rec.info),
    }
