"""Deterministic report writers: canonical JSON, full-precision CSV, atomic files.

Reports must be byte-identical across reruns with the same configuration and
seed, so the JSON form is canonical (sorted keys, fixed separators, shortest
round-trip float representation) and wall-clock timings go to a separate
sidecar file that is excluded from the determinism contract.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

__all__ = [
    "jsonable",
    "canonical_json",
    "write_text_atomic",
    "write_json_report",
    "write_csv",
    "fmt",
]

SCHEMA_VERSION = 1


def fmt(x: float) -> str:
    """Full-precision decimal form (17 significant digits) for CSV cells."""
    return f"{x:.17g}"


def jsonable(obj):
    """Convert nested values to plain JSON types; complex becomes [re, im]."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        if z.imag == 0.0:
            return z.real
        return [z.real, z.imag]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def canonical_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_text_atomic(path: str, text: str):
    """Write via a temp file and rename, so readers never see partial reports."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_json_report(path: str, report: dict):
    write_text_atomic(path, canonical_json(report))


def write_csv(path: str, header: list[str], rows: list[list]):
    """CSV with a header row, unix newlines, 17-significant-digit floats."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(fmt(float(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    write_text_atomic(path, "\n".join(lines) + "\n")
