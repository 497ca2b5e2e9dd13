"""Krylov subspace construction and solvability diagnostics in finite truncations.

A Krylov basis holds the power vectors g, Ag, A^2 g, ... (optionally stored
unit-norm with their magnitudes factored out, which preserves the span) next
to an orthonormal companion built by modified Gram-Schmidt with a relative
rank tolerance.  The grade is the first power at which the span stops
growing.  Distances from a vector to the nested Krylov spaces are computed in
the requested norm: weighted least squares for p = 2, linear programming
(:mod:`kbl.optim`) for p in {1, inf}.

The finite renderings of the structural criteria live here as well: the
intersection of the closed Krylov space with the image of a complement, the
invertible-case density criterion, and the reducedness residual of a
complement under the operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import optim
from .errors import (
    ComplexDataError,
    DimensionMismatchError,
    PreconditionError,
    SingularityError,
)
from .operators import Operator, apply_array
from .spaces import SpaceSpec, array_norm

__all__ = [
    "KrylovBasis",
    "DistanceResult",
    "SolvabilityReport",
    "SweepThresholds",
    "IntersectionReport",
    "build_krylov",
    "distance_to_krylov",
    "solvability_sweep",
    "krylov_intersection",
    "check_density_criterion",
    "check_reduced",
    "numerical_rank",
    "RANK_TOL",
]

RANK_TOL = 1e-10  # singular values / residual norms below RANK_TOL * scale count as zero


def numerical_rank(mat: np.ndarray, tol: float = RANK_TOL) -> int:
    """Rank by singular values, zeroing those below ``tol`` times the largest."""
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > tol * s[0]).sum())


@dataclass(frozen=True, eq=False)
class KrylovBasis:
    """Raw power vectors with an orthonormal companion and grade metadata.

    ``raw[:, k]`` stores A^k g divided by ``multipliers[k]`` (all ones when
    built without rescaling).  ``ortho`` has one column per independent
    direction; ``added_at[j]`` is the power index that contributed column j,
    and ``rmat`` expresses the stored raw vectors in the companion:
    ``raw ~= ortho @ rmat``.  ``grade`` is the smallest m with
    rank(K_m) = rank(K_{m+1}) when that happens within the built range.
    """

    A: Operator
    g: np.ndarray
    raw: np.ndarray
    multipliers: np.ndarray
    ortho: np.ndarray
    rmat: np.ndarray
    added_at: tuple[int, ...]
    grade: int | None

    @property
    def m(self) -> int:
        return self.raw.shape[1]

    @property
    def rank(self) -> int:
        return self.ortho.shape[1]

    def rank_at(self, m: int) -> int:
        """Dimension of span{g, ..., A^(m-1) g}."""
        return int(sum(1 for j in self.added_at if j < m))


def build_krylov(A: Operator, g, m: int, rescale: bool = True) -> KrylovBasis:
    """Build the order-m Krylov basis of (A, g) with grade detection.

    Powers are produced iteratively; with ``rescale`` each stored vector is
    unit Euclidean norm and the factored-out magnitude is logged in
    ``multipliers`` (the span, and hence every distance diagnostic, is
    unchanged).  The orthonormal companion uses modified Gram-Schmidt with a
    second orthogonalisation pass; a new vector whose orthogonal residual
    falls below ``RANK_TOL`` times its own norm adds no direction and marks
    the grade.
    """
    if m < 1:
        raise PreconditionError("need at least one Krylov vector")
    g_arr = np.asarray(getattr(g, "coords", g), dtype=complex).reshape(-1)
    if g_arr.shape[0] != A.dim:
        raise DimensionMismatchError("generator length does not match operator dimension")
    if not np.any(g_arr):
        raise PreconditionError("zero datum generates a trivial Krylov space")

    n = A.dim
    raw = np.zeros((n, m), dtype=complex)
    mult = np.zeros(m)
    q_cols: list[np.ndarray] = []
    rmat = np.zeros((m, m), dtype=complex)
    added: list[int] = []
    grade: int | None = None

    v = g_arr
    scale = 1.0
    for k in range(m):
        nv = np.linalg.norm(v)
        if nv == 0.0:
            if grade is None:
                grade = k
            break
        if rescale:
            scale = scale * nv if k else nv
            raw[:, k] = v / nv
            mult[k] = scale
        else:
            raw[:, k] = v
            mult[k] = 1.0
        w = raw[:, k].copy()
        wnorm = np.linalg.norm(w)
        for _pass in range(2):
            for j, q in enumerate(q_cols):
                h = np.vdot(q, w)
                rmat[j, k] += h
                w -= h * q
        res = np.linalg.norm(w)
        if res > RANK_TOL * wnorm:
            w /= res
            q_cols.append(w)
            rmat[len(q_cols) - 1, k] = res
            added.append(k)
        elif grade is None:
            grade = k
        v = apply_array(A, raw[:, k])

    r = len(q_cols)
    ortho = np.column_stack(q_cols) if q_cols else np.zeros((n, 0), dtype=complex)
    return KrylovBasis(
        A=A,
        g=g_arr,
        raw=raw,
        multipliers=mult,
        ortho=ortho,
        rmat=rmat[:r, :m],
        added_at=tuple(added),
        grade=grade,
    )


@dataclass(frozen=True, eq=False)
class DistanceResult:
    """Distance to a Krylov space with minimisers in two coordinate systems.

    ``coefficients`` refer to the original power vectors A^k g (rescaling
    multipliers mapped back); ``ortho_coefficients`` refer to the orthonormal
    companion columns, which is the numerically stable representation to
    re-evaluate the residual with.
    """

    distance: float
    coefficients: np.ndarray
    ortho_coefficients: np.ndarray
    m: int
    rank: int

    def __iter__(self):  # unpacks like (distance, coefficients)
        return iter((self.distance, self.coefficients))


def distance_to_krylov(
    f, kb: KrylovBasis, space: SpaceSpec, m: int | None = None
) -> DistanceResult:
    """Distance of f to span{g, ..., A^(m-1) g} in the given norm.

    p = 2 uses weighted normal equations on the orthonormal companion;
    p in {1, inf} delegates to the LP distances of :mod:`kbl.optim`
    (real data only).
    """
    f_arr = np.asarray(getattr(f, "coords", f), dtype=complex).reshape(-1)
    if f_arr.shape[0] != kb.raw.shape[0]:
        raise DimensionMismatchError("vector length does not match basis dimension")
    if m is None:
        m = kb.m
    if not 1 <= m <= kb.m:
        raise PreconditionError(f"m={m} outside the built range 1..{kb.m}")
    r = kb.rank_at(m)
    Q = kb.ortho[:, :r]

    if space.p == 2:
        # weighted least squares on the companion; solved through the
        # sqrt-weight-scaled system, which has the normal equations' minimiser
        # without squaring the condition number
        sw = np.sqrt(space.weights)
        c_ortho, *_ = np.linalg.lstsq(sw[:, None] * Q, sw * f_arr, rcond=None)
        resid = f_arr - Q @ c_ortho
        dist = array_norm(space, resid)
    else:
        if np.abs(f_arr.imag).max(initial=0.0) > 0.0 or (
            Q.size and np.abs(Q.imag).max() > 0.0
        ):
            raise ComplexDataError("p in {1, inf} distances require real data")
        cols = list(Q.real.T)
        if space.p == 1:
            dist, c_real = optim.l1_distance(f_arr.real, cols, weight=space.weight)
        else:
            dist, c_real = optim.chebyshev_distance(f_arr.real, cols)
        c_ortho = c_real.astype(complex)

    # map companion coefficients back to the leading independent raw powers,
    # then undo the rescaling; trailing (dependent) powers get coefficient 0
    c_raw = np.zeros(m, dtype=complex)
    if r:
        lead = kb.rmat[:r, list(kb.added_at[:r])]
        c_lead = np.linalg.solve(lead, c_ortho)
        c_raw[list(kb.added_at[:r])] = c_lead
    coeff = c_raw / np.where(kb.multipliers[:m] == 0.0, 1.0, kb.multipliers[:m])
    return DistanceResult(float(dist), coeff, c_ortho, m, r)


@dataclass(frozen=True)
class SweepThresholds:
    """Verdict thresholds for :func:`solvability_sweep` (all configurable)."""

    eps_solve_rel: float = 1e-6  # solvable when d_M <= eps * ||f||
    floor_frac: float = 0.5  # not-solvable needs d_M >= frac * d_1 ...
    stagnation_frac: float = 0.01  # ... and a tail varying less than this


@dataclass(frozen=True, eq=False)
class SolvabilityReport:
    """d_m table for one norm with the threshold verdict and residual."""

    distances: tuple[float, ...]
    verdict: str  # "solvable-in-Krylov" | "not-in-Krylov" | "inconclusive"
    residual: float
    dim: int
    m_max: int
    p: float
    rank: int
    grade: int | None
    thresholds: SweepThresholds


def solvability_sweep(
    A: Operator,
    f,
    space: SpaceSpec,
    M: int,
    thresholds: SweepThresholds | None = None,
) -> SolvabilityReport:
    """Sweep distances of f to the nested Krylov spaces of (A, A f).

    The datum is g := A f, which guarantees the problem is solvable on the
    truncation; the question the sweep probes is whether the solution f is
    reachable inside the Krylov closure.  The verdict applies the configured
    thresholds: distances below ``eps_solve_rel * ||f||`` at m = M mean
    solvable-in-Krylov; a floor at ``floor_frac * d_1`` together with a tail
    (last half of the table) varying by less than ``stagnation_frac`` means
    not-in-Krylov; anything else is inconclusive.
    """
    if M < 2:
        raise PreconditionError("sweeps need M >= 2")
    th = thresholds or SweepThresholds()
    f_arr = np.asarray(getattr(f, "coords", f), dtype=complex).reshape(-1)
    if not np.any(f_arr):
        raise PreconditionError("zero vector has a trivial sweep")
    g = apply_array(A, f_arr)
    kb = build_krylov(A, g, M)
    results = [distance_to_krylov(f_arr, kb, space, m=m) for m in range(1, M + 1)]
    ds = [res.distance for res in results]

    fnorm = array_norm(space, f_arr)
    last = results[-1]
    r = kb.rank_at(last.m)
    x_hat = kb.ortho[:, :r] @ last.ortho_coefficients
    gnorm = array_norm(space, g)
    residual = array_norm(space, apply_array(A, x_hat) - g) / (gnorm or 1.0)

    tail = ds[M // 2 - 1 :]
    stagnant = (max(tail) - min(tail)) <= th.stagnation_frac * max(max(tail), 1e-300)
    if ds[-1] <= th.eps_solve_rel * fnorm:
        verdict = "solvable-in-Krylov"
    elif ds[-1] >= th.floor_frac * ds[0] and stagnant:
        verdict = "not-in-Krylov"
    else:
        verdict = "inconclusive"
    return SolvabilityReport(
        distances=tuple(ds),
        verdict=verdict,
        residual=float(residual),
        dim=A.dim,
        m_max=M,
        p=space.p,
        rank=kb.rank,
        grade=kb.grade,
        thresholds=th,
    )


@dataclass(frozen=True, eq=False)
class IntersectionReport:
    """Dimensions of the Krylov space, a complement, its image, and their meet."""

    dim_K: int
    dim_G: int
    dim_AG: int
    dim_intersection: int
    trivial: bool
    complement_kind: str  # "euclidean" | "user"
    grade: int


def _complete_grade_basis(A: Operator, g) -> KrylovBasis:
    kb = build_krylov(A, g, A.dim + 1)
    if kb.grade is None:
        raise PreconditionError("grade not detected within dim+1 powers")
    return kb


def krylov_intersection(A: Operator, g, complement="euclidean") -> IntersectionReport:
    """Dimension of (Krylov space) meet (A applied to a complement).

    In a finite truncation the closed Krylov space is the span at grade.  The
    default complement is the Euclidean orthogonal complement; a user-supplied
    complement (list of basis vectors) is validated to be a true algebraic
    complement: trivial meet with K and joint span of the whole space.
    """
    kb = _complete_grade_basis(A, g)
    K = kb.ortho
    n, r = K.shape
    if isinstance(complement, str):
        if complement != "euclidean":
            raise PreconditionError(f"unknown complement kind {complement!r}")
        # full SVD of K: the trailing left singular vectors span the orthocomplement
        u, _, _ = np.linalg.svd(K, full_matrices=True)
        G = u[:, r:]
        kind = "euclidean"
    else:
        cols = [np.asarray(getattr(v, "coords", v), dtype=complex).reshape(-1) for v in complement]
        G = np.column_stack(cols) if cols else np.zeros((n, 0), dtype=complex)
        if G.shape[0] != n:
            raise DimensionMismatchError("complement vectors have wrong length")
        rank_G = numerical_rank(G)
        joint = numerical_rank(np.hstack([K, G]))
        if joint != r + rank_G:
            raise PreconditionError("user complement intersects the Krylov space")
        if joint != n:
            raise PreconditionError("user complement does not span a complement")
        kind = "user"
    AG = np.column_stack([apply_array(A, G[:, j]) for j in range(G.shape[1])]) if G.shape[1] else np.zeros((n, 0), dtype=complex)
    dim_G = numerical_rank(G)
    dim_AG = numerical_rank(AG)
    dim_sum = numerical_rank(np.hstack([K, AG]))
    dim_int = r + dim_AG - dim_sum
    return IntersectionReport(
        dim_K=r,
        dim_G=dim_G,
        dim_AG=dim_AG,
        dim_intersection=dim_int,
        trivial=dim_int == 0,
        complement_kind=kind,
        grade=kb.grade,
    )


def check_density_criterion(A: Operator, g) -> bool:
    """Finite rendering of the invertible-case density criterion.

    Requires A to be invertible (smallest singular value above the rank
    tolerance); returns whether rank(A K) equals rank(K) at grade, which in a
    finite truncation is equivalent to the solution A^{-1} g lying in the
    grade Krylov space.
    """
    mat = A.to_dense()
    s = np.linalg.svd(mat, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise SingularityError("operator is numerically singular")
    kb = _complete_grade_basis(A, g)
    K = kb.ortho
    AK = mat @ K
    return numerical_rank(AK) == K.shape[1]


def check_reduced(A: Operator, K_basis, G_basis) -> float:
    """Residual of A-invariance of the complement: 0 means A(G) stays in G.

    Returns the maximum over complement basis vectors v of the relative
    Euclidean distance of A v to span(G).  An empty complement is vacuously
    reduced.
    """
    n = A.dim
    G_cols = [np.asarray(getattr(v, "coords", v), dtype=complex).reshape(-1) for v in G_basis]
    if not G_cols:
        return 0.0
    G = np.column_stack(G_cols)
    K_cols = [np.asarray(getattr(v, "coords", v), dtype=complex).reshape(-1) for v in K_basis]
    K = np.column_stack(K_cols) if K_cols else np.zeros((n, 0), dtype=complex)
    if numerical_rank(G) < G.shape[1]:
        raise PreconditionError("complement basis is degenerate")
    if K.shape[1] and numerical_rank(np.hstack([K, G])) != numerical_rank(K) + G.shape[1]:
        raise PreconditionError("bases do not span complementary subspaces")
    QG, _ = np.linalg.qr(G)
    worst = 0.0
    for j in range(G.shape[1]):
        w = apply_array(A, G[:, j])
        nw = np.linalg.norm(w)
        if nw == 0.0:
            continue
        resid = np.linalg.norm(w - QG @ (QG.conj().T @ w)) / nw
        worst = max(worst, float(resid))
    return worst
