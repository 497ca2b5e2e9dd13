"""Run-configuration parsing: strict schema validation and object builders.

Configs are JSON files (or inline dicts).  Unknown fields are rejected at
every level so typos fail loudly before any computation starts.  Complex
numbers are written as a plain number or a two-element [re, im] list.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ConfigError
from .operators import Operator, dense, diagonal, shift, volterra_matrix
from .spaces import SpaceSpec, exp_decay_weight
from .spectral import Contour, circle, polygon

__all__ = [
    "load_config",
    "apply_overrides",
    "validate_keys",
    "parse_complex",
    "build_space",
    "build_operator",
    "build_vector",
    "build_contour",
]


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            cfg = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def apply_overrides(cfg: dict, assignments: list[str]) -> dict:
    """Apply ``key=value`` (dotted keys descend); values parse as JSON, else string."""
    out = json.loads(json.dumps(cfg))  # deep copy of plain JSON data
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {key!r} crosses a non-object")
        node[parts[-1]] = value
    return out


def validate_keys(spec: dict, allowed: set[str], where: str):
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)} in {where}; allowed: {sorted(allowed)}")


def parse_complex(value, where: str = "value") -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where} must be a number or [re, im] pair, got {value!r}")


def build_space(spec: dict) -> SpaceSpec:
    validate_keys(spec, {"p", "weight", "dim"}, "space")
    try:
        p_raw = spec["p"]
        dim = int(spec["dim"])
    except KeyError as exc:
        raise ConfigError(f"space spec missing field {exc}") from exc
    p = math.inf if p_raw in ("inf", "Inf", "infinity") else float(p_raw)
    weight_spec = spec.get("weight", "unit")
    if weight_spec == "unit":
        weight = None
    elif weight_spec == "exp_decay":
        weight = exp_decay_weight(dim)
    elif isinstance(weight_spec, list):
        weight = np.asarray(weight_spec, dtype=float)
    else:
        raise ConfigError(f"unknown weight {weight_spec!r}; use 'unit', 'exp_decay' or a list")
    try:
        return SpaceSpec(p=int(p) if p != math.inf else p, dim=dim, weight=weight)
    except Exception as exc:
        raise ConfigError(f"invalid space spec: {exc}") from exc


_SIGMA_GENERATORS = {
    "inv_sqrt": lambda n: 1.0 / np.sqrt(np.arange(1, n + 1, dtype=float)),
    "inv_n": lambda n: 1.0 / np.arange(1, n + 1, dtype=float),
}


def build_operator(spec: dict) -> Operator:
    kind = spec.get("kind")
    if kind == "diag":
        validate_keys(spec, {"kind", "sigma", "dim"}, "operator(diag)")
        sigma = spec.get("sigma")
        if isinstance(sigma, str):
            if sigma not in _SIGMA_GENERATORS:
                raise ConfigError(f"unknown sigma generator {sigma!r}")
            if "dim" not in spec:
                raise ConfigError("diag operator with generator sigma needs 'dim'")
            values = _SIGMA_GENERATORS[sigma](int(spec["dim"]))
        elif isinstance(sigma, list):
            values = np.array([parse_complex(s, "sigma entry") for s in sigma])
        else:
            raise ConfigError("diag operator needs 'sigma' (name or list)")
        return diagonal(values)
    if kind == "shift":
        validate_keys(spec, {"kind", "offset", "dim"}, "operator(shift)")
        return shift(int(spec.get("offset", 1)), int(spec["dim"]))
    if kind == "volterra":
        validate_keys(spec, {"kind", "n", "rule"}, "operator(volterra)")
        return volterra_matrix(int(spec["n"]), spec.get("rule", "rectangle"))
    if kind == "dense":
        validate_keys(spec, {"kind", "matrix", "spectrum"}, "operator(dense)")
        rows = spec.get("matrix")
        if not isinstance(rows, list):
            raise ConfigError("dense operator needs a 'matrix' list of rows")
        mat = np.array([[parse_complex(x, "matrix entry") for x in row] for row in rows])
        spectrum = None
        if "spectrum" in spec:
            spectrum = np.array([parse_complex(x, "spectrum entry") for x in spec["spectrum"]])
        return dense(mat, spectrum=spectrum)
    raise ConfigError(f"unknown operator kind {kind!r}; use diag, shift, volterra or dense")


_VECTOR_GENERATORS = {
    "ones": lambda n: np.ones(n),
    "inv_n": lambda n: 1.0 / np.arange(1, n + 1, dtype=float),
    "inv_sqrt": lambda n: 1.0 / np.sqrt(np.arange(1, n + 1, dtype=float)),
    "even_indicator": lambda n: (np.arange(1, n + 1) % 2 == 0).astype(float),
    "grid": lambda n: np.arange(1, n + 1) / n,
}


def build_vector(spec, dim: int) -> np.ndarray:
    if isinstance(spec, dict) and "name" in spec:
        validate_keys(spec, {"name"}, "vector")
        name = spec["name"]
        if name not in _VECTOR_GENERATORS:
            raise ConfigError(f"unknown vector generator {name!r}; known: {sorted(_VECTOR_GENERATORS)}")
        return _VECTOR_GENERATORS[name](dim).astype(complex)
    if isinstance(spec, dict) and "basis" in spec:
        validate_keys(spec, {"basis"}, "vector")
        k = int(spec["basis"])
        if not 1 <= k <= dim:
            raise ConfigError(f"basis index {k} outside 1..{dim}")
        out = np.zeros(dim, dtype=complex)
        out[k - 1] = 1.0
        return out
    if isinstance(spec, dict) and "values" in spec:
        validate_keys(spec, {"values"}, "vector")
        vals = np.array([parse_complex(v, "vector entry") for v in spec["values"]])
        if vals.shape[0] != dim:
            raise ConfigError(f"vector has {vals.shape[0]} entries, expected {dim}")
        return vals
    raise ConfigError("vector spec needs one of 'name', 'basis' or 'values'")


def build_contour(spec: dict) -> Contour:
    kind = spec.get("kind")
    if kind == "circle":
        validate_keys(spec, {"kind", "center", "radius", "nodes"}, "contour(circle)")
        return circle(
            parse_complex(spec.get("center", 0.0), "contour center"),
            float(spec["radius"]),
            int(spec.get("nodes", 64)),
        )
    if kind == "polygon":
        validate_keys(spec, {"kind", "vertices", "per_edge"}, "contour(polygon)")
        verts = [parse_complex(v, "contour vertex") for v in spec.get("vertices", [])]
        return polygon(verts, int(spec.get("per_edge", 32)))
    raise ConfigError(f"unknown contour kind {kind!r}; use circle or polygon")
