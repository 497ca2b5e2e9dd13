"""Resolvent computation with certified error bounds and analytic continuation.

Sign convention, fixed repo-wide: ``R(zeta, A) = (A - zeta I)^(-1)``.  Both
series used here are consistent with it: the large-|zeta| expansion
``R = -sum zeta^(-n-1) A^n`` and the recentred expansion
``R(zeta) = sum (zeta - zeta0)^n R(zeta0)^(n+1)``.

The chain-of-balls continuation walks a polyline through the resolvent set:
covering balls of radius eta/4 with centres eta/2 apart (eta = distance of the
path to the spectrum) keep every recentred series ratio at most 1/2.  Error
certificates are tracked per oracle eigenvalue: for diagonal operators every
computed matrix in the chain is diagonal, so the scalar recursion

    e' <= e / (1 - q~)^2  +  (1/d) q^(order+1) / (1 - q)

(q = |step| / d, q~ inflated by the incoming error, d = distance of the centre
to the eigenvalue) is a true bound on each entry.  For non-normal dense
operators with a user oracle the same recursion is reported as a modal
estimate; certified use is restricted to operators whose resolvent growth is
governed by the spectrum (normal case).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegreeCapError,
    KblError,
    MarginError,
    PreconditionError,
    SingularityError,
)
from .operators import Operator, inf_norm, spectral_radius

__all__ = [
    "ResolventPoint",
    "PathPlan",
    "ApproxOperator",
    "ApproxVector",
    "LaurentSeed",
    "NeumannStep",
    "ShiftPower",
    "resolvent_direct",
    "resolvent_laurent",
    "resolvent_neumann_step",
    "plan_path",
    "continue_resolvent",
    "kclass_inverse",
    "extract_polynomial",
    "apply_shifted_power",
    "formal_degree",
    "provenance_to_json",
    "DEGREE_CAP",
]

log = logging.getLogger(__name__)

DEGREE_CAP = 64
_RESIDUAL_FULL_LIMIT = 800  # matrix size up to which direct solves verify the full residual


# ---------------------------------------------------------------------------
# provenance tree


@dataclass(frozen=True)
class LaurentSeed:
    """Truncated large-|zeta| series: -sum_{k=0..order} zeta^(-k-1) A^k."""

    zeta: complex
    order: int


@dataclass(frozen=True)
class NeumannStep:
    """Recentred series sum_{n=0..order} (zeta-zeta_base)^n R_child^(n+1)."""

    child: "LaurentSeed | NeumannStep | ShiftPower"
    zeta: complex
    zeta_base: complex
    order: int


@dataclass(frozen=True)
class ShiftPower:
    """Left-multiplication by (A - lam)^power."""

    child: "LaurentSeed | NeumannStep | ShiftPower"
    lam: complex
    power: int


def formal_degree(node) -> int:
    """Degree of the polynomial the provenance tree expands to (not computed)."""
    if isinstance(node, LaurentSeed):
        return node.order
    if isinstance(node, NeumannStep):
        return (node.order + 1) * (formal_degree(node.child) + 1) - 1
    if isinstance(node, ShiftPower):
        return node.power + formal_degree(node.child)
    raise KblError(f"unknown provenance node {type(node).__name__}")


def _expand_poly(node) -> np.ndarray:
    poly = np.polynomial.polynomial
    if isinstance(node, LaurentSeed):
        k = np.arange(node.order + 1)
        return -np.asarray(node.zeta, dtype=complex) ** (-k - 1)
    if isinstance(node, NeumannStep):
        child = _expand_poly(node.child)
        delta = node.zeta - node.zeta_base
        acc = np.zeros(1, dtype=complex)
        power = child.copy()  # child^(n+1)
        for n in range(node.order + 1):
            acc = poly.polyadd(acc, delta**n * power)
            if n < node.order:
                power = poly.polymul(power, child)
        return acc
    if isinstance(node, ShiftPower):
        child = _expand_poly(node.child)
        shift = poly.polypow(np.array([-node.lam, 1.0], dtype=complex), node.power)
        return poly.polymul(shift, child)
    raise KblError(f"unknown provenance node {type(node).__name__}")


def provenance_to_json(node) -> dict:
    """Nested plain-dict form of a provenance tree for inclusion in reports."""
    if isinstance(node, LaurentSeed):
        return {"kind": "laurent", "zeta": [node.zeta.real, node.zeta.imag], "order": node.order}
    if isinstance(node, NeumannStep):
        return {
            "kind": "recentre",
            "zeta": [node.zeta.real, node.zeta.imag],
            "zeta_base": [node.zeta_base.real, node.zeta_base.imag],
            "order": node.order,
            "child": provenance_to_json(node.child),
        }
    if isinstance(node, ShiftPower):
        return {
            "kind": "shift_power",
            "lam": [node.lam.real, node.lam.imag],
            "power": node.power,
            "child": provenance_to_json(node.child),
        }
    raise KblError(f"unknown provenance node {type(node).__name__}")


# ---------------------------------------------------------------------------
# result types


@dataclass(frozen=True, eq=False)
class ResolventPoint:
    """An evaluated resolvent matrix R(zeta, A) = (A - zeta I)^(-1).

    ``error_bound`` is an upper bound on ||value - R(zeta,A)||_inf (per-entry
    exact for diagonal operators, modal for dense operators with an oracle);
    ``modal_errors`` carries the per-oracle-eigenvalue error vector used by
    the continuation bookkeeping.
    """

    A: Operator
    zeta: complex
    value: np.ndarray
    method: str  # "direct" | "series" | "continuation"
    error_bound: float | None
    residual: float | None = None
    modal_errors: np.ndarray | None = None
    provenance: object | None = None


@dataclass(frozen=True, eq=False)
class PathPlan:
    """Polyline continuation plan: covering ball centres, radii and orders.

    ``eta`` is the exact minimum distance from the polyline to the oracle
    spectrum; centres are spaced at most eta/2 apart along the polyline so
    every recentred series has ratio at most 1/2 (the covering balls have
    radius eta/4).  ``orders[i]`` is the series order of the hop from
    centre i to centre i+1, chosen so the hop's truncation tail stays below
    ``per_step_bound``.
    """

    vertices: tuple[complex, ...]
    eta: float
    centers: tuple[complex, ...]
    radius: float
    orders: tuple[int, ...]
    per_step_bound: float
    eps_total: float

    def to_json(self) -> dict:
        return {
            "vertices": [[z.real, z.imag] for z in self.vertices],
            "eta": self.eta,
            "centers": [[z.real, z.imag] for z in self.centers],
            "radius": self.radius,
            "orders": list(self.orders),
            "per_step_bound": self.per_step_bound,
            "eps_total": self.eps_total,
        }


@dataclass(frozen=True, eq=False)
class ApproxOperator:
    """A matrix certified to lie in the polynomial-in-A closure.

    The provenance tree records the exact series/composition structure, so an
    explicit polynomial can be extracted on demand (degree permitting), and
    ``error_bound`` majorises ||value - R(target zeta, A)||_inf.
    """

    A: Operator
    value: np.ndarray
    provenance: object
    error_bound: float
    degree_bound: int | None = None

    def to_json(self) -> dict:
        return {
            "error_bound": self.error_bound,
            "degree_bound": self.degree_bound,
            "provenance": provenance_to_json(self.provenance),
        }


@dataclass(frozen=True, eq=False)
class ApproxVector:
    """Result of the vector form of continuation: R(zeta', A) g with a bound."""

    value: np.ndarray
    error_bound: float
    provenance: object


# ---------------------------------------------------------------------------
# direct evaluation


def _oracle_distance(A: Operator, zeta: complex) -> float | None:
    if A.spectrum_oracle is None:
        return None
    return float(np.abs(A.spectrum_oracle - zeta).min())


def _volterra_rectangle_inverse(n: int, zeta: complex) -> np.ndarray:
    """First-column recurrence for the lower-triangular Toeplitz system.

    (V - zeta I) has constant diagonals t_0 = -zeta, t_k = 1/n (k >= 1); its
    inverse is again lower-triangular Toeplitz, determined by its first
    column, which forward substitution yields in O(n):
    x_1 = 1/t_0, x_i = -(1/n) (x_1 + ... + x_{i-1}) / t_0.
    """
    col = np.zeros(n, dtype=complex)
    col[0] = 1.0 / (-zeta)
    running = col[0]
    for i in range(1, n):
        col[i] = -(running / n) / (-zeta)
        running += col[i]
    first_row = np.zeros(n, dtype=complex)
    first_row[0] = col[0]
    return scipy.linalg.toeplitz(col, first_row)


def resolvent_direct(A: Operator, zeta: complex, residual: str = "auto") -> ResolventPoint:
    """Solve (A - zeta I) X = I by LU with partial pivoting.

    Structured fast paths: triangular matrices use a triangular solve, and the
    rectangle-rule integration operator uses its Toeplitz first-column
    recurrence.  ``residual`` is "full" (exact ||(A - zeta)X - I||_inf),
    "probe" (two fixed probe vectors; cheap, recorded as an estimate) or
    "auto" (full up to 800x800, probe beyond).
    """
    zeta = complex(zeta)
    dist = _oracle_distance(A, zeta)
    if dist is not None and dist <= 1e-12 * (1.0 + abs(zeta)):
        raise SingularityError(
            f"zeta={zeta} is at distance {dist:.3e} from the spectrum"
        )
    n = A.dim
    if A.kind == "volterra" and A.rule == "rectangle":
        if zeta == 0:
            raise SingularityError("zeta=0 lies in the spectrum of the nilpotent truncation")
        value = _volterra_rectangle_inverse(n, zeta)
    else:
        mat = A.to_dense() - zeta * np.eye(n)
        try:
            if np.count_nonzero(np.triu(mat, 1)) == 0:
                value = scipy.linalg.solve_triangular(mat, np.eye(n, dtype=complex), lower=True)
            else:
                lu, piv = scipy.linalg.lu_factor(mat)
                value = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex))
        except scipy.linalg.LinAlgError as exc:
            raise SingularityError(f"solve failed at zeta={zeta}: {exc}") from exc
        if not np.all(np.isfinite(value)):
            raise SingularityError(f"solve returned non-finite entries at zeta={zeta}")

    mode = residual
    if residual == "auto":
        mode = "full" if n <= _RESIDUAL_FULL_LIMIT else "probe"
    if mode == "full":
        res = inf_norm((A.to_dense() - zeta * np.eye(n)) @ value - np.eye(n))
    elif mode == "probe":
        rng = np.random.default_rng(12345)
        w = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        w /= np.abs(w).sum(axis=0)
        lhs = A.to_dense() @ (value @ w) - zeta * (value @ w) - w
        res = float(np.abs(lhs).max())
    else:
        raise KblError(f"unknown residual mode {residual!r}")

    bound = None
    if mode == "full" and res < 1.0:
        bound = inf_norm(value) * res / (1.0 - res) + 1e-15 * (1.0 + inf_norm(value))
    modal = None
    if A.spectrum_oracle is not None:
        base = bound if bound is not None else 0.0
        modal = np.full(A.spectrum_oracle.shape, base + 1e-14 / max(dist, 1e-300))
    return ResolventPoint(
        A=A,
        zeta=zeta,
        value=value,
        method="direct",
        error_bound=bound,
        residual=res,
        modal_errors=modal,
    )


# ---------------------------------------------------------------------------
# series with certificates


def _growth_rate(A: Operator) -> float:
    """Submultiplicative growth rate for power tails: exact for diagonals."""
    if A.kind == "diag":
        return float(np.abs(A.sigma).max()) if A.dim else 0.0
    return inf_norm(A.to_dense())


def resolvent_laurent(A: Operator, zeta: complex, order: int) -> ResolventPoint:
    """Truncated series -sum_{k=0..order} zeta^(-k-1) A^k with tail bound.

    Requires |zeta| above the spectral radius estimate.  The certified tail is
    rho^(order+1) / (|zeta|^(order+1) (|zeta| - rho)) with rho the growth rate
    (max |eigenvalue| for diagonals, the sup-norm otherwise); if the powers
    vanish exactly within the truncation (nilpotent kinds) the sum is exact.
    """
    if order < 0:
        raise PreconditionError("order must be >= 0")
    zeta = complex(zeta)
    spr = spectral_radius(A).spr_upper
    if abs(zeta) <= spr:
        raise MarginError(f"|zeta|={abs(zeta):.6g} does not exceed spr bound {spr:.6g}")
    log.debug("laurent margin |zeta| - spr = %.6g", abs(zeta) - spr)
    n = A.dim
    acc = np.zeros((n, n), dtype=complex)
    power = np.eye(n, dtype=complex)
    dense = A.to_dense()
    nilpotent_cut = False
    for k in range(order + 1):
        acc -= power / zeta ** (k + 1)
        if k < order:
            power = dense @ power
            if not power.any():
                nilpotent_cut = True
                break
    rho = _growth_rate(A)
    if nilpotent_cut or (A.kind == "volterra" and A.rule == "rectangle" and order + 1 >= n):
        tail = 0.0
    elif abs(zeta) > rho:
        tail = rho ** (order + 1) / (abs(zeta) ** (order + 1) * (abs(zeta) - rho))
    else:
        raise MarginError(
            f"tail bound needs |zeta| > {rho:.6g} (growth rate) or nilpotency within {order} powers"
        )
    modal = _laurent_modal_errors(A, zeta, order, tail)
    if modal is not None:
        bound = float(modal.max())
    else:
        bound = float(tail + 1e-14 * (1.0 + inf_norm(acc)))
    return ResolventPoint(
        A=A,
        zeta=zeta,
        value=acc,
        method="series",
        error_bound=bound,
        residual=None,
        modal_errors=modal,
        provenance=LaurentSeed(zeta, order),
    )


def _laurent_modal_errors(A: Operator, zeta: complex, order: int, tail: float):
    """Per-eigenvalue truncation bound of the large-|zeta| series (value-free)."""
    if A.spectrum_oracle is None:
        return None
    lam = np.abs(A.spectrum_oracle)
    with np.errstate(divide="ignore", invalid="ignore"):
        modal = lam ** (order + 1) / (abs(zeta) ** (order + 1) * (abs(zeta) - lam))
        rmax = 1.0 / (abs(zeta) - lam)
    modal = np.where(np.isfinite(modal), modal, tail)
    rmax = np.where(np.isfinite(rmax) & (rmax > 0), rmax, 1.0)
    return modal + 1e-13 * rmax + 1e-15


def resolvent_neumann_step(R0: ResolventPoint, zeta: complex, order: int) -> ResolventPoint:
    """Recentre a resolvent: sum_{n=0..order} (zeta - zeta0)^n R0^(n+1).

    Valid while |zeta - zeta0| stays below the distance of zeta0 to the
    spectrum (ratio at most 3/4 enforced, matching the covering-ball
    geometry).  The certificate combines the geometric truncation tail with
    the propagation of R0's own error through the series derivative; both are
    evaluated per oracle eigenvalue when an oracle is present.
    """
    zeta = complex(zeta)
    A = R0.A
    delta = zeta - R0.zeta
    if delta == 0:
        return R0
    if A.spectrum_oracle is not None:
        d0 = np.abs(A.spectrum_oracle - R0.zeta)
        dist0 = float(d0.min())
    else:
        nv = inf_norm(R0.value)
        dist0 = 1.0 / nv if nv > 0 else math.inf
        d0 = np.array([dist0])
    q_geom = abs(delta) / dist0
    if q_geom > 0.75 + 1e-12:
        raise MarginError(
            f"step ratio {q_geom:.3f} exceeds 3/4 of the distance to the spectrum"
        )

    n = A.dim
    acc = np.zeros((n, n), dtype=complex)
    power = R0.value.copy()  # R0^(n+1)
    for k in range(order + 1):
        acc += delta**k * power
        if k < order:
            power = power @ R0.value

    e0 = R0.modal_errors if R0.modal_errors is not None else np.array([R0.error_bound or 0.0])
    modal = _step_modal_errors(d0, e0, abs(delta), order)
    prov = None
    if R0.provenance is not None:
        prov = NeumannStep(R0.provenance, zeta, R0.zeta, order)
    return ResolventPoint(
        A=A,
        zeta=zeta,
        value=acc,
        method="series" if R0.method == "series" else "continuation",
        error_bound=float(modal.max()),
        residual=None,
        modal_errors=modal if A.spectrum_oracle is not None else None,
        provenance=prov,
    )


def _step_modal_errors(d0: np.ndarray, e0: np.ndarray, step: float, order: int) -> np.ndarray:
    """Per-eigenvalue error recursion of one recentring hop.

    Combines the propagation of the incoming error through the truncated
    series derivative with the geometric truncation tail; depends only on the
    hop geometry and the order, never on computed matrix values, so the whole
    chain's certificate can be simulated before any matrix work.
    """
    r_abs = 1.0 / d0
    q = step * r_abs
    q_infl = step * (r_abs + e0)
    if np.any(q_infl >= 1.0):
        raise MarginError("series ratio reaches 1 after error inflation")
    tail = r_abs * q ** (order + 1) / (1.0 - q)
    prop = e0 / (1.0 - q_infl) ** 2
    return prop + tail + 1e-13 * (r_abs + e0) + 1e-15


# ---------------------------------------------------------------------------
# path planning and continuation


def _segment_distance(p: complex, a: complex, b: complex) -> float:
    """Distance from point p to the segment [a, b]."""
    if a == b:
        return abs(p - a)
    t = ((p - a).conjugate() * (b - a)).real / abs(b - a) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * (b - a)))


def plan_path(
    A: Operator,
    zeta0: complex,
    zeta1: complex,
    waypoints=(),
    eps_total: float = 1e-8,
) -> PathPlan:
    """Plan a chain-of-balls continuation along a polyline.

    The polyline is zeta0 -> waypoints -> zeta1; eta is its exact minimum
    distance to the oracle spectrum (point-to-segment distances).  Ball
    centres are placed every eta/2 of arc length (radius eta/4), and each
    hop's series order is chosen so its truncation tail is below
    eps_total / (2 (hops + 1)).  Membership of the endpoints in the same
    component of the resolvent set is the caller's responsibility: waypoints
    define the homotopy class, the planner only certifies the margin.
    """
    if A.spectrum_oracle is None:
        raise PreconditionError("path continuation requires a spectrum oracle")
    if eps_total <= 0:
        raise PreconditionError("eps_total must be positive")
    vertices = [complex(zeta0)] + [complex(w) for w in waypoints] + [complex(zeta1)]
    vertices = [v for i, v in enumerate(vertices) if i == 0 or v != vertices[i - 1]]
    spectrum = A.spectrum_oracle
    eta = math.inf
    for a, b in zip(vertices[:-1], vertices[1:]):
        for lam in spectrum:
            eta = min(eta, _segment_distance(complex(lam), a, b))
    if len(vertices) == 1:
        eta = float(np.abs(spectrum - vertices[0]).min())
    if not math.isfinite(eta) or eta <= 1e-8:
        raise MarginError(f"polyline comes within {eta:.3e} of the spectrum")

    step = eta / 2.0
    centers = [vertices[0]]
    for a, b in zip(vertices[:-1], vertices[1:]):
        seg_len = abs(b - a)
        direction = (b - a) / seg_len
        walked = 0.0
        while walked + step < seg_len - 1e-15:
            walked += step
            centers.append(a + walked * direction)
        if centers[-1] != b:
            centers.append(b)

    n_hops = len(centers) - 1
    budget = eps_total / (2.0 * (n_hops + 1))
    orders = []
    for i in range(n_hops):
        d = float(np.abs(spectrum - centers[i]).min())
        q = abs(centers[i + 1] - centers[i]) / d
        if q >= 1.0:
            raise MarginError("hop ratio reached 1; path margin is inconsistent")
        # (1/d) q^(order+1) / (1-q) <= budget
        target = budget * (1.0 - q) * d
        order = 0 if q == 0.0 else max(0, math.ceil(math.log(target) / math.log(q)) - 1)
        orders.append(int(max(order, 4)))
    return PathPlan(
        vertices=tuple(vertices),
        eta=float(eta),
        centers=tuple(centers),
        radius=float(eta / 4.0),
        orders=tuple(orders),
        per_step_bound=float(budget),
        eps_total=float(eps_total),
    )


def _chain_schedule(A: Operator, plan: PathPlan, extra: int) -> tuple[int, list[int]]:
    spr = spectral_radius(A).spr_upper
    z0 = plan.centers[0]
    if abs(z0) <= spr:
        raise PreconditionError(
            f"continuation seed |zeta0|={abs(z0):.6g} must exceed the spectral radius bound {spr:.6g}"
        )
    rho = _growth_rate(A)
    ratio = rho / abs(z0)
    budget = plan.eps_total / (2.0 * (len(plan.centers)))
    if ratio == 0.0:
        seed_order = A.dim
    elif ratio < 1.0:
        seed_order = max(4, math.ceil(math.log(budget * (abs(z0) - rho)) / math.log(ratio)))
    else:
        raise MarginError("seed point does not dominate the operator growth rate")
    return seed_order + extra, [order + extra for order in plan.orders]


def _simulate_bound(A: Operator, plan: PathPlan, seed_order: int, orders: list[int]) -> float:
    """Final certified bound of a chain, from geometry and orders alone.

    Runs the exact per-eigenvalue error recursion the execution uses; since
    neither the seed bound nor the hop recursion involves computed matrices,
    the simulated and executed certificates coincide.
    """
    z0 = plan.centers[0]
    rho = _growth_rate(A)
    if abs(z0) > rho:
        tail = rho ** (seed_order + 1) / (abs(z0) ** (seed_order + 1) * (abs(z0) - rho))
    elif A.kind == "volterra" and A.rule == "rectangle" and seed_order + 1 >= A.dim:
        tail = 0.0
    else:
        raise MarginError("seed point does not dominate the operator growth rate")
    err = _laurent_modal_errors(A, z0, seed_order, tail)
    for za, zb, order in zip(plan.centers[:-1], plan.centers[1:], orders):
        d0 = np.abs(A.spectrum_oracle - za)
        err = _step_modal_errors(d0, err, abs(zb - za), order)
    return float(err.max())


def _run_chain(A: Operator, plan: PathPlan, seed_order: int, orders: list[int]) -> ResolventPoint:
    point = resolvent_laurent(A, plan.centers[0], seed_order)
    for zeta, order in zip(plan.centers[1:], orders):
        point = resolvent_neumann_step(point, zeta, order)
    return point


def continue_resolvent(A: Operator, plan: PathPlan, g=None):
    """Continue the resolvent along a plan; operator or vector form.

    The chain is seeded by the truncated large-|zeta| series at the first
    centre (a polynomial in A, so every later recentred series stays inside
    the polynomial closure) and hops centre to centre.  Series orders start
    at the plan's values and are raised until the simulated certificate fits
    the error budget; if the executed bound still exceeds it, the chain is
    re-run once with higher orders before giving up.  With a vector ``g``
    the result is R(zeta', A) g with the operator bound applied to ||g||.
    """
    seed_order, orders = _chain_schedule(A, plan, 0)
    for extra in (0, 4, 8, 16, 32, 64):
        try:
            simulated = _simulate_bound(A, plan, seed_order + extra, [o + extra for o in orders])
        except MarginError:
            simulated = math.inf
        if simulated <= 0.9 * plan.eps_total:
            seed_order += extra
            orders = [o + extra for o in orders]
            break
    point = _run_chain(A, plan, seed_order, orders)
    if point.error_bound > plan.eps_total:
        log.info(
            "accumulated bound %.3e exceeds eps_total %.3e; re-running with higher orders",
            point.error_bound,
            plan.eps_total,
        )
        point = _run_chain(A, plan, seed_order + 8, [o + 8 for o in orders])
        if point.error_bound > plan.eps_total:
            raise MarginError(
                f"certified bound {point.error_bound:.3e} still exceeds eps_total {plan.eps_total:.3e}"
            )
    if g is not None:
        g_arr = np.asarray(getattr(g, "coords", g), dtype=complex).reshape(-1)
        return ApproxVector(
            value=point.value @ g_arr,
            error_bound=point.error_bound * float(np.abs(g_arr).max(initial=0.0)),
            provenance=point.provenance,
        )
    return ApproxOperator(
        A=A,
        value=point.value,
        provenance=point.provenance,
        error_bound=point.error_bound,
        degree_bound=formal_degree(point.provenance),
    )


def kclass_inverse(A: Operator, eps: float, waypoints=()) -> ApproxOperator:
    """Polynomial-closure approximant of A^(-1), via continuation to zero.

    Requires an oracle with no eigenvalue at 0; the path runs from
    2 * (spectral radius bound) down to 0, bending through any supplied
    waypoints, and the result carries a certified bound of at most eps on
    ||value - A^(-1)||_inf (exact for diagonal operators).
    """
    if A.spectrum_oracle is None:
        raise PreconditionError("inverse approximation requires a spectrum oracle")
    if np.abs(A.spectrum_oracle).min() <= 1e-12:
        raise PreconditionError("operator has an eigenvalue at 0")
    spr = spectral_radius(A).spr_upper
    plan = plan_path(A, 2.0 * spr, 0.0, waypoints=waypoints, eps_total=eps)
    return continue_resolvent(A, plan)


# ---------------------------------------------------------------------------
# polynomial extraction and closure operations


def _horner(coeffs: np.ndarray, A: Operator) -> np.ndarray:
    dense = A.to_dense()
    acc = np.eye(A.dim, dtype=complex) * coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc @ dense + c * np.eye(A.dim)
    return acc


def extract_polynomial(ap: ApproxOperator, degree_cap: int = DEGREE_CAP) -> np.ndarray:
    """Expand the provenance tree to explicit polynomial coefficients in A.

    Coefficients are ascending (constant term first).  The formal degree is
    computed structurally first and the expansion refused beyond the cap,
    since chained recentred series grow degree multiplicatively.  The
    expansion is verified by evaluating on A against the stored matrix.
    """
    degree = formal_degree(ap.provenance)
    if degree > degree_cap:
        raise DegreeCapError(
            f"formal degree {degree} exceeds the extraction cap {degree_cap}"
        )
    coeffs = _expand_poly(ap.provenance)
    check = _horner(coeffs, ap.A)
    err = inf_norm(check - ap.value)
    if err > 1e-9 * (1.0 + inf_norm(ap.value)):
        raise KblError(
            f"polynomial expansion fails to reproduce the evaluated matrix (residual {err:.3e})"
        )
    return coeffs


def apply_shifted_power(ap: ApproxOperator, lam: complex, power: int) -> ApproxOperator:
    """(A - lam)^power times an approximant, staying in the polynomial closure."""
    if power < 0:
        raise PreconditionError("power must be >= 0")
    lam = complex(lam)
    dense = ap.A.to_dense()
    shift = dense - lam * np.eye(ap.A.dim)
    value = ap.value.copy()
    for _ in range(power):
        value = shift @ value
    amp = inf_norm(shift) ** power
    return ApproxOperator(
        A=ap.A,
        value=value,
        provenance=ShiftPower(ap.provenance, lam, power),
        error_bound=ap.error_bound * amp + 1e-15 * (1.0 + inf_norm(value)),
        degree_bound=power + (ap.degree_bound if ap.degree_bound is not None else formal_degree(ap.provenance)),
    )
