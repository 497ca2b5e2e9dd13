"""Small dense linear-programming solver and the distance computations built on it.

The solver is a classical two-phase tableau simplex for problems of the form

    minimise c'x  subject to  A_ub x <= b_ub,  x_j >= 0 or x_j free.

Pivoting is deterministic: Dantzig's rule by default, switching to Bland's
anti-cycling rule whenever the objective stalls, with the leaving row always
tie-broken by lowest basis index.  Given identical input the solver performs
identical pivots.

Two distance front-ends are provided for real data:

* :func:`chebyshev_distance` - min over coefficients of the sup-norm residual,
  solved by exchange: small primal LPs over an active set of sample points,
  grown by worst-violation scans, so large sample counts never build large
  tableaus.
* :func:`l1_distance` - weighted sum of absolute residuals, solved in primal
  form with one slab variable per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ComplexDataError, KblError, LpNumericalError, LpSizeError

__all__ = [
    "LinearProgram",
    "LpSolution",
    "solve_lp",
    "chebyshev_distance",
    "l1_distance",
    "format_lp",
    "MAX_CONSTRAINTS",
]

MAX_CONSTRAINTS = 5000

_FEAS_TOL = 1e-9
_OPT_TOL = 1e-9
_PIVOT_TOL = 1e-10
_STALL_LIMIT = 30  # pivots without progress before switching to Bland's rule


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """min c'x subject to A_ub x <= b_ub (and optionally A_eq x = b_eq)
    with per-variable nonnegativity flags."""

    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    nonneg: np.ndarray  # bool per variable; False = free
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.shape[0]
        A = np.asarray(self.A_ub, dtype=float).reshape(-1, n)
        b = np.asarray(self.b_ub, dtype=float).reshape(-1)
        nn = np.asarray(self.nonneg, dtype=bool).reshape(-1)
        Ae = np.zeros((0, n)) if self.A_eq is None else np.asarray(self.A_eq, dtype=float).reshape(-1, n)
        be = np.zeros(0) if self.b_eq is None else np.asarray(self.b_eq, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0] or nn.shape != c.shape or Ae.shape[0] != be.shape[0]:
            raise KblError(
                f"inconsistent LP dimensions: c {c.shape}, A_ub {A.shape}, "
                f"b_ub {b.shape}, A_eq {Ae.shape}, b_eq {be.shape}, nonneg {nn.shape}"
            )
        for name, arr in (("c", c), ("A_ub", A), ("b_ub", b), ("A_eq", Ae), ("b_eq", be)):
            if not np.all(np.isfinite(arr)):
                raise KblError(f"LP field {name} contains non-finite entries")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A_ub", A)
        object.__setattr__(self, "b_ub", b)
        object.__setattr__(self, "nonneg", nn)
        object.__setattr__(self, "A_eq", Ae)
        object.__setattr__(self, "b_eq", be)

    @property
    def n_constraints(self) -> int:
        return self.A_ub.shape[0] + self.A_eq.shape[0]

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Outcome of a solve: status, optimal value, primal point, row prices.

    ``dual`` holds one price per inequality row (<= 0 in this minimisation
    form) and ``dual_eq`` one free multiplier per equality row, with the
    convention ``value == b_ub . dual + b_eq . dual_eq`` at an optimum.
    """

    status: str  # "optimal" | "unbounded" | "infeasible"
    value: float
    x: np.ndarray | None
    iterations: int
    dual: np.ndarray | None = None
    dual_eq: np.ndarray | None = None


def format_lp(lp: LinearProgram) -> str:
    """Human-readable dump of an LP instance, for debugging reports."""
    lines = ["minimise"]
    lines.append("  " + " + ".join(f"{ci:.17g}*x{j}" for j, ci in enumerate(lp.c)))
    lines.append("subject to")
    for i in range(lp.A_ub.shape[0]):
        row = " + ".join(f"{a:.17g}*x{j}" for j, a in enumerate(lp.A_ub[i]) if a != 0.0)
        lines.append(f"  {row or '0'} <= {lp.b_ub[i]:.17g}")
    for i in range(lp.A_eq.shape[0]):
        row = " + ".join(f"{a:.17g}*x{j}" for j, a in enumerate(lp.A_eq[i]) if a != 0.0)
        lines.append(f"  {row or '0'} == {lp.b_eq[i]:.17g}")
    bounds = ", ".join(
        f"x{j} >= 0" if nn else f"x{j} free" for j, nn in enumerate(lp.nonneg)
    )
    lines.append("with " + bounds)
    return "\n".join(lines)


def solve_lp(
    lp: LinearProgram,
    max_constraints: int = MAX_CONSTRAINTS,
    max_iter: int | None = None,
) -> LpSolution:
    """Solve a dense LP with the two-phase simplex method.

    Deterministic given its input.  On numerical breakdown the right-hand side
    is perturbed once (by a fixed, seeded jitter at the 1e-10 level) and the
    solve retried; a second failure raises :class:`LpNumericalError`.
    """
    if lp.n_constraints > max_constraints:
        raise LpSizeError(
            f"{lp.n_constraints} constraints exceed the cap of {max_constraints}"
        )
    try:
        return _simplex(lp, max_iter)
    except LpNumericalError:
        rng = np.random.default_rng(0)
        jitter = 1e-10 * (1.0 + np.abs(lp.b_ub)) * rng.choice([-1.0, 1.0], lp.b_ub.shape)
        jitter_eq = (
            1e-10 * (1.0 + np.abs(lp.b_eq)) * rng.choice([-1.0, 1.0], lp.b_eq.shape)
        )
        perturbed = LinearProgram(
            lp.c, lp.A_ub, lp.b_ub + jitter, lp.nonneg, lp.A_eq, lp.b_eq + jitter_eq
        )
        return _simplex(perturbed, max_iter)


def _simplex(lp: LinearProgram, max_iter: int | None) -> LpSolution:
    m_ub, m_eq, n = lp.A_ub.shape[0], lp.A_eq.shape[0], lp.n_vars
    m = m_ub + m_eq
    free = ~lp.nonneg
    n_free = int(free.sum())
    n_struct = n + n_free  # free variables split into positive/negative parts

    # structural columns: x_j for all j, then the negated copies of free vars
    A_all = np.vstack([lp.A_ub, lp.A_eq]) if m_eq else lp.A_ub
    b_all = np.concatenate([lp.b_ub, lp.b_eq])
    A_struct = np.empty((m, n_struct))
    A_struct[:, :n] = A_all
    A_struct[:, n:] = -A_all[:, free]
    c_struct = np.empty(n_struct)
    c_struct[:n] = lp.c
    c_struct[n:] = -lp.c[free]

    sign = np.where(b_all < 0.0, -1.0, 1.0)
    rhs = sign * b_all
    A_scaled = sign[:, None] * A_struct
    # artificials: scaled inequality rows that lost their slack start, plus every equality row
    art_rows = np.concatenate(
        [np.nonzero(sign[:m_ub] < 0.0)[0], np.arange(m_ub, m)]
    ).astype(int)
    n_slack = m_ub
    n_art = art_rows.shape[0]
    n_total = n_struct + n_slack + n_art

    T = np.zeros((m, n_total + 1))
    T[:, :n_struct] = A_scaled
    T[np.arange(m_ub), n_struct + np.arange(m_ub)] = sign[:m_ub]
    T[art_rows, n_struct + n_slack + np.arange(n_art)] = 1.0
    T[:, -1] = rhs

    basis = np.zeros(m, dtype=int)
    basis[: m_ub] = n_struct + np.arange(m_ub)
    basis[art_rows] = n_struct + n_slack + np.arange(n_art)

    if max_iter is None:
        max_iter = 2000 + 20 * m + 2 * n_total
    iters = 0
    scale = 1.0 + np.abs(b_all).max(initial=0.0)

    if n_art:
        # phase-1 objective row (reduced cost | -value) for minimising sum of artificials
        orow = np.zeros(n_total + 1)
        orow[n_struct + n_slack : n_total] = 1.0
        for i in art_rows:
            orow -= T[i]
        allowed = np.ones(n_total, dtype=bool)
        orow, basis, used, status = _pivot_loop(T, basis, orow, allowed, max_iter - iters)
        iters += used
        if status != "optimal":
            raise LpNumericalError("phase 1 of the simplex did not terminate")
        if -orow[-1] > _FEAS_TOL * scale:
            return LpSolution("infeasible", math.nan, None, iters)

    # phase 2: real objective, artificial columns barred from entering
    orow = np.zeros(n_total + 1)
    orow[:n_struct] = c_struct
    for i in range(m):
        cb = c_struct[basis[i]] if basis[i] < n_struct else 0.0
        if cb != 0.0:
            orow -= cb * T[i]
    allowed = np.ones(n_total, dtype=bool)
    allowed[n_struct + n_slack :] = False
    orow, basis, used, status = _pivot_loop(T, basis, orow, allowed, max_iter - iters)
    iters += used
    if status == "unbounded":
        return LpSolution("unbounded", -math.inf, None, iters)
    if status != "optimal":
        raise LpNumericalError("phase 2 of the simplex did not terminate")

    z = np.zeros(n_total)
    z[basis] = T[:, -1]
    x = z[:n]
    x[free] -= z[n:n_struct]
    value = float(np.dot(lp.c, x))
    dual = -orow[n_struct : n_struct + n_slack]
    art_red = orow[n_struct + n_slack : n_total]
    dual_eq = np.zeros(m_eq)
    eq_art_pos = np.nonzero(art_rows >= m_ub)[0]
    dual_eq[art_rows[eq_art_pos] - m_ub] = -sign[art_rows[eq_art_pos]] * art_red[eq_art_pos]

    # feasibility re-check in the backward-error sense: violations are measured
    # against the row's own magnitude at x, so benign cancellation with large
    # coefficients does not masquerade as infeasibility
    if m_ub:
        row_scale = 1.0 + np.abs(lp.A_ub) @ np.abs(x) + np.abs(lp.b_ub)
        if ((lp.A_ub @ x - lp.b_ub) / row_scale).max() > _FEAS_TOL:
            raise LpNumericalError("optimal point fails inequality feasibility re-check")
    if m_eq:
        row_scale = 1.0 + np.abs(lp.A_eq) @ np.abs(x) + np.abs(lp.b_eq)
        if (np.abs(lp.A_eq @ x - lp.b_eq) / row_scale).max() > _FEAS_TOL:
            raise LpNumericalError("optimal point fails equality feasibility re-check")
    return LpSolution("optimal", value, x, iters, dual, dual_eq)


def _pivot_loop(T, basis, orow, allowed, budget):
    """Run simplex pivots in place.

    ``orow`` is the objective row [reduced costs | -value]; it is row-reduced
    together with the tableau.  Returns the updated row, basis, pivot count
    and a status string.
    """
    m = T.shape[0]
    stall = 0
    bland = False
    for it in range(budget):
        red = orow[:-1]
        eligible = allowed & (red < -_OPT_TOL)
        if not eligible.any():
            return orow, basis, it, "optimal"
        if bland:
            j = int(np.nonzero(eligible)[0][0])
        else:
            j = int(np.argmin(np.where(eligible, red, 0.0)))
        col = T[:, j]
        pos = col > _PIVOT_TOL
        if not pos.any():
            return orow, basis, it, "unbounded"
        ratios = np.full(m, np.inf)
        ratios[pos] = T[pos, -1] / col[pos]
        rmin = ratios.min()
        ties = np.nonzero(ratios <= rmin + 1e-12 * (1.0 + abs(rmin)))[0]
        r = int(ties[np.argmin(basis[ties])])

        pivot = T[r, j]
        T[r] /= pivot
        factors = T[:, j].copy()
        factors[r] = 0.0
        T -= np.outer(factors, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        step = orow[j] * T[r, -1]  # <= 0: objective decrease of this pivot
        orow -= orow[j] * T[r]
        orow[j] = 0.0
        basis[r] = j
        np.maximum(T[:, -1], 0.0, out=T[:, -1])

        if step < -1e-12 * (1.0 + abs(orow[-1])):
            stall = 0
            bland = False
        else:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        if not np.isfinite(orow[-1]):
            raise LpNumericalError("simplex objective became non-finite")
    raise LpNumericalError("simplex iteration budget exhausted")


def _as_real_matrix(f, basis) -> tuple[np.ndarray, np.ndarray]:
    """Coerce (f, basis) to real 1-D array and N-by-K real matrix."""
    fv = _real_coords(f)
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        basis = list(basis.T)
    cols = [_real_coords(b) for b in basis]
    if not cols:
        raise KblError("distance computations need a nonempty basis")
    B = np.column_stack(cols)
    if B.shape[0] != fv.shape[0]:
        raise KblError("basis vectors and target have different lengths")
    return fv, B


def _real_coords(v) -> np.ndarray:
    arr = np.asarray(getattr(v, "coords", v))
    if np.iscomplexobj(arr):
        if np.abs(arr.imag).max(initial=0.0) > 0.0:
            raise ComplexDataError("LP-based distances are defined for real data only")
        arr = arr.real
    return np.asarray(arr, dtype=float).reshape(-1)


def chebyshev_distance(f, basis) -> tuple[float, np.ndarray]:
    """Minimax distance min_c max_n |f_n - sum_k c_k b_k,n| and a minimiser.

    Solved by constraint generation (the classical exchange scheme for
    discrete minimax fits): a small primal LP ``min t, |residual_n| <= t`` is
    solved by :func:`solve_lp` over an active set of sample points, the full
    residual is scanned for the worst violation, and the offending point is
    added until none remains.  The final value is optimal for the full
    problem to within the scan tolerance (1e-11 relative), since the
    active-set optimum is a lower bound and the returned coefficients are
    feasible up to the largest ignored violation.
    """
    fv, B = _as_real_matrix(f, basis)
    n, k = B.shape
    active = [int(np.argmax(np.abs(fv)))]
    in_set = np.zeros(n, dtype=bool)
    in_set[active[0]] = True
    dist, coeff = 0.0, np.zeros(k)
    for _ in range(n):
        idx = np.array(active)
        rows = np.zeros((2 * idx.size, k + 1))
        rows[: idx.size, :k] = B[idx]
        rows[idx.size :, :k] = -B[idx]
        rows[:, k] = -1.0
        rhs = np.concatenate([fv[idx], -fv[idx]])
        obj = np.zeros(k + 1)
        obj[k] = 1.0
        nonneg = np.zeros(k + 1, dtype=bool)
        sol = solve_lp(LinearProgram(obj, rows, rhs, nonneg))
        if sol.status != "optimal":
            raise LpNumericalError(f"minimax LP ended with status {sol.status}")
        coeff = sol.x[:k]
        dist = max(0.0, sol.value)
        resid = np.abs(fv - B @ coeff)
        worst = int(np.argmax(resid))
        # a violator already in the active set means the LP's own feasibility
        # slack (1e-9) is the remaining gap; nothing further to exchange
        if in_set[worst] or resid[worst] <= dist + 1e-11 * (1.0 + dist):
            return dist, coeff
        active.append(worst)
        in_set[worst] = True
    return dist, coeff


def l1_distance(f, basis, weight: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Weighted absolute-sum distance min_c sum_n w_n |f_n - (Bc)_n| and a minimiser."""
    fv, B = _as_real_matrix(f, basis)
    n, k = B.shape
    w = np.ones(n) if weight is None else np.asarray(weight, dtype=float).reshape(-1)
    if w.shape[0] != n:
        raise KblError("weight length does not match the sample count")
    # variables: coefficients c (free), slabs s >= 0 with +-(f - Bc) <= s
    c_obj = np.concatenate([np.zeros(k), w])
    A = np.zeros((2 * n, k + n))
    A[:n, :k] = B
    A[:n, k:] = -np.eye(n)
    A[n:, :k] = -B
    A[n:, k:] = -np.eye(n)
    b = np.concatenate([fv, -fv])
    nonneg = np.concatenate([np.zeros(k, dtype=bool), np.ones(n, dtype=bool)])
    sol = solve_lp(LinearProgram(c_obj, A, b, nonneg))
    if sol.status != "optimal":
        raise LpNumericalError(f"l1 LP ended with status {sol.status}")
    return max(0.0, sol.value), sol.x[:k]
