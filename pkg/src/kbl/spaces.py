"""Norm contexts for truncated sequence spaces and coordinate-mask projections.

A :class:`SpaceSpec` fixes an exponent p (1, 2 or inf), an ambient truncation
dimension N and an optional strictly positive weight per coordinate.  The
weighted norm is ``(sum_n w(n) |x_n|^p)^(1/p)`` for finite p and the plain sup
norm for p = inf (which is always used unweighted).  Coordinate masks realise
complemented subspaces: the projection onto ``{x : supp(x) subset S}`` is
multiplication by the indicator of S, and its complement is the indicator of
the complementary index set.

Indices are 1-based everywhere in the public API and in reports; internal
storage is 0-based numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, KblError

__all__ = [
    "SpaceSpec",
    "Vector",
    "Mask",
    "norm",
    "graph_norm",
    "mask_project",
    "decompose",
    "exp_decay_weight",
    "basis_vector",
]

_ALLOWED_P = (1, 2, math.inf)


def exp_decay_weight(dim: int) -> np.ndarray:
    """Weight sequence w(n) = exp(-n) for n = 1..dim."""
    return np.exp(-np.arange(1, dim + 1, dtype=float))


@dataclass(frozen=True, eq=False)
class SpaceSpec:
    """A norm context: exponent, optional positive weight, truncation dimension."""

    p: float
    dim: int
    weight: np.ndarray | None = None

    def __post_init__(self):
        if self.p not in _ALLOWED_P:
            raise KblError(f"unsupported exponent p={self.p!r}; use 1, 2 or inf")
        if self.dim < 1:
            raise KblError(f"dimension must be positive, got {self.dim}")
        if self.weight is not None:
            w = np.asarray(self.weight, dtype=float)
            if w.shape != (self.dim,):
                raise DimensionMismatchError(
                    f"weight has length {w.shape}, space dimension is {self.dim}"
                )
            if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
                raise KblError("weights must be strictly positive and finite")
            if self.p == math.inf:
                raise KblError("the sup-norm space is used unweighted")
            object.__setattr__(self, "weight", w)

    @property
    def weights(self) -> np.ndarray:
        """Effective weight array (all ones when no weight is set)."""
        if self.weight is None:
            return np.ones(self.dim)
        return self.weight


@dataclass(frozen=True, eq=False)
class Vector:
    """A point of a truncated sequence space."""

    space: SpaceSpec
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=complex).reshape(-1)
        if c.shape != (self.space.dim,):
            raise DimensionMismatchError(
                f"vector has {c.shape[0]} coordinates, space dimension is {self.space.dim}"
            )
        object.__setattr__(self, "coords", c)


def basis_vector(space: SpaceSpec, index: int) -> Vector:
    """Canonical vector e_index (1-based)."""
    if not 1 <= index <= space.dim:
        raise DimensionMismatchError(f"basis index {index} outside 1..{space.dim}")
    c = np.zeros(space.dim, dtype=complex)
    c[index - 1] = 1.0
    return Vector(space, c)


@dataclass(frozen=True)
class Mask:
    """A subset S of coordinate indices {1, ..., N} (1-based)."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if idx and idx[0] < 1:
            raise KblError("mask indices are 1-based and must be >= 1")
        object.__setattr__(self, "indices", idx)

    def bool_array(self, dim: int) -> np.ndarray:
        if self.indices and self.indices[-1] > dim:
            raise DimensionMismatchError(
                f"mask index {self.indices[-1]} exceeds dimension {dim}"
            )
        out = np.zeros(dim, dtype=bool)
        if self.indices:
            out[np.asarray(self.indices) - 1] = True
        return out

    def complement(self, dim: int) -> "Mask":
        keep = self.bool_array(dim)
        return Mask(tuple(int(i) for i in np.nonzero(~keep)[0] + 1))


def array_norm(space: SpaceSpec, coords: np.ndarray) -> float:
    """Norm of a raw coordinate array in the given space (internal helper)."""
    c = np.asarray(coords)
    if c.size == 0:
        return 0.0
    a = np.abs(c)
    if space.p == math.inf:
        return float(a.max())
    w = space.weights
    if space.p == 1:
        return float(np.dot(w, a))
    return float(math.sqrt(np.dot(w, a * a)))


def norm(v: Vector) -> float:
    """Norm of v in its own space: weighted p-sum for p in {1, 2}, sup for inf."""
    return array_norm(v.space, v.coords)


def graph_norm(v: Vector, A) -> float:
    """Graph norm ||v|| + ||A v|| in v's space.

    For the bounded truncated operators used here this is merely an equivalent
    utility norm; it is exposed for diagnostics.
    """
    from .operators import apply  # deferred to avoid an import cycle

    return norm(v) + norm(apply(A, v))


def mask_project(v: Vector, S: Mask) -> Vector:
    """Zero every coordinate outside S; this is the projection onto {x : supp x in S}."""
    keep = S.bool_array(v.space.dim)
    return Vector(v.space, np.where(keep, v.coords, 0.0))


def decompose(v: Vector, S: Mask) -> tuple[Vector, Vector]:
    """Split v = (part supported on S) + (part supported on the complement).

    The split is pure coordinate selection, so the two parts have disjoint
    supports and their sum reproduces v bit-exactly.
    """
    keep = S.bool_array(v.space.dim)
    return (
        Vector(v.space, np.where(keep, v.coords, 0.0)),
        Vector(v.space, np.where(keep, 0.0, v.coords)),
    )
