"""Executable catalog of worked examples, each a scripted, headless experiment.

Every case builds its operators and data from a parameter dict (defaults
below, overridable from the CLI), runs deterministically, and returns a
report dict with named assertions; a case passes when all assertions hold
and its computed verdict matches the expected one.  Quantitative thresholds
are oracle-derived baselines recorded here (and cross-checked in the test
suite against an independent solver), not theory values: finite truncations
soften the infinite-dimensional dichotomies, and the honest signals are
distance floors, stagnation, and ordering gaps rather than fixed heights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import krylov, operators, optim, spaces, spectral
from .errors import ConfigError
from .krylov import SweepThresholds
from .operators import volterra_resolvent_exact
from .spaces import Mask, SpaceSpec, Vector

__all__ = ["CaseStudy", "CATALOG", "run_case", "case_ids"]


@dataclass(frozen=True)
class CaseStudy:
    """A scripted experiment: constructor defaults, expected outcome, runner."""

    id: str
    title: str
    expected_verdict: str | None
    defaults: dict
    runner: Callable[[dict], dict]
    notes: str


def _check(assertions: list, name: str, value, threshold, cmp: str) -> bool:
    value = float(value)
    threshold = float(threshold)
    if cmp == "<=":
        ok = value <= threshold
    elif cmp == ">=":
        ok = value >= threshold
    elif cmp == "abs<=":
        ok = abs(value) <= threshold
        value = value  # reported as-is; comparator documents the form
    else:
        raise ConfigError(f"unknown comparator {cmp!r}")
    assertions.append(
        {"name": name, "value": value, "threshold": threshold, "comparator": cmp, "passed": ok}
    )
    return ok


def _distance_rows(report: krylov.SolvabilityReport, label: str) -> list[list]:
    return [
        [m + 1, d, label, report.dim] for m, d in enumerate(report.distances)
    ]


def _p_label(p) -> str:
    return "inf" if p == math.inf else str(int(p))


# ---------------------------------------------------------------------------
# forward shift: datum outside the range; solution blocked at coordinate one


def _case_shift(params: dict) -> dict:
    dim = params["dim"]
    m_max = params["m_max"]
    assertions: list = []
    tables: dict = {}
    results: dict = {}

    range_rows = []
    for n in params["dim_sweep"]:
        A = operators.shift(1, n)
        e1 = np.eye(n)[0]
        _, res, *_ = np.linalg.lstsq(A.to_dense(), e1.astype(complex), rcond=None)
        resid = math.sqrt(float(res[0])) if res.size else float(
            np.linalg.norm(A.to_dense() @ np.linalg.pinv(A.to_dense()) @ e1 - e1)
        )
        range_rows.append([n, resid])
    tables["range_residual"] = {"header": ["N", "residual"], "rows": range_rows}
    _check(assertions, "datum_outside_range_residual_is_one", range_rows[-1][1] - 1.0, 1e-9, "abs<=")

    A = operators.shift(1, dim)
    f = np.eye(dim)[0]  # solution of A f = e_2 with first coordinate 1
    sp = SpaceSpec(math.inf, dim)
    sweep = krylov.solvability_sweep(A, f, sp, m_max)
    tables["distances"] = {
        "header": ["m", "distance", "norm", "N"],
        "rows": _distance_rows(sweep, "inf"),
    }
    _check(assertions, "distance_floor_at_first_coordinate", min(sweep.distances), 1.0 - 1e-9, ">=")
    full_basis = list(np.eye(dim))
    d_full, _ = optim.chebyshev_distance(f, full_basis)
    _check(assertions, "distance_to_full_space_vanishes", d_full, 1e-9, "<=")
    results["verdict"] = sweep.verdict
    results["residual_of_candidate"] = sweep.residual
    return {
        "tables": tables,
        "metrics": results,
        "residuals": {"candidate": sweep.residual},
        "assertions": assertions,
        "verdict": sweep.verdict,
        "figures": [{"kind": "distances", "table": "distances"}],
    }


# ---------------------------------------------------------------------------
# diagonal sigma_n = 1/sqrt(n): the solvable / not-solvable dichotomy pair


def _diag_sweep(dim: int, f_kind: str, m_max: int, thresholds: SweepThresholds):
    n = np.arange(1, dim + 1, dtype=float)
    A = operators.diagonal(1.0 / np.sqrt(n))
    f = 1.0 / np.sqrt(n) if f_kind == "inv_sqrt" else np.ones(dim)
    sp = SpaceSpec(math.inf, dim)
    return krylov.solvability_sweep(A, f, sp, m_max, thresholds)


def _case_diag_solvable(params: dict) -> dict:
    assertions: list = []
    tables: dict = {}
    th = SweepThresholds(
        eps_solve_rel=params["eps_solve_rel"], floor_frac=params["floor_frac"]
    )
    rows = []
    sweep = None
    for dim in params["dim_sweep"]:
        sweep = _diag_sweep(dim, "inv_sqrt", params["m_max"], th)
        rows.extend(_distance_rows(sweep, "inf"))
    tables["distances"] = {"header": ["m", "distance", "norm", "N"], "rows": rows}
    ds = sweep.distances
    mono = max(ds[i + 1] - ds[i] for i in range(len(ds) - 1))
    _check(assertions, "distances_nonincreasing", mono, 1e-9, "<=")
    _check(assertions, "final_distance", ds[-1], params["final_threshold"], "<=")

    # LP feasibility: re-evaluate the minimiser against the companion basis
    nvec = np.arange(1, sweep.dim + 1, dtype=float)
    A = operators.diagonal(1.0 / np.sqrt(nvec))
    kb = krylov.build_krylov(A, 1.0 / nvec, params["m_max"])
    res = krylov.distance_to_krylov(1.0 / np.sqrt(nvec), kb, SpaceSpec(math.inf, sweep.dim))
    Q = kb.ortho[:, : res.rank]
    reeval = float(np.abs(1.0 / np.sqrt(nvec) - Q @ res.ortho_coefficients).max())
    _check(assertions, "coefficients_reproduce_distance", reeval - res.distance, 1e-9, "abs<=")
    return {
        "tables": tables,
        "metrics": {"verdict": sweep.verdict, "final_distance": ds[-1], "rank": sweep.rank},
        "residuals": {"candidate": sweep.residual},
        "assertions": assertions,
        "verdict": sweep.verdict,
        "figures": [{"kind": "distances", "table": "distances"}],
    }


def _case_diag_not_solvable(params: dict) -> dict:
    assertions: list = []
    tables: dict = {}
    th = SweepThresholds(
        eps_solve_rel=params["eps_solve_rel"], floor_frac=params["floor_frac"]
    )
    rows = []
    per_dim: dict[int, krylov.SolvabilityReport] = {}
    for dim in params["dim_sweep"]:
        sweep = per_dim[dim] = _diag_sweep(dim, "ones", params["verdict_m_max"], th)
        rows.extend(_distance_rows(sweep, "inf"))
    tables["distances"] = {"header": ["m", "distance", "norm", "N"], "rows": rows}

    main = per_dim[params["dim_sweep"][-1]]
    head = main.distances[: params["m_max"]]
    _check(assertions, "distance_floor", min(head), params["floor_baseline"], ">=")
    _check(assertions, "initial_distance_near_full_height", head[0], 0.9, ">=")
    mono = max(
        main.distances[i + 1] - main.distances[i] for i in range(len(main.distances) - 1)
    )
    _check(assertions, "distances_nonincreasing", mono, 1e-9, "<=")
    # truncation instability: the floor rises with N at fixed m (the
    # infinite-dimensional obstruction only strengthens as the tail grows)
    if len(params["dim_sweep"]) > 1:
        small = per_dim[params["dim_sweep"][0]]
        worst = max(
            small.distances[m] - main.distances[m] for m in range(params["m_max"])
        )
        _check(assertions, "floor_grows_with_dimension", worst, 1e-9, "<=")
    return {
        "tables": tables,
        "metrics": {
            "verdict": main.verdict,
            "distance_floor": min(head),
            "rank": main.rank,
        },
        "residuals": {"candidate": main.residual},
        "assertions": assertions,
        "verdict": main.verdict,
        "figures": [{"kind": "distances", "table": "distances"}],
    }


# ---------------------------------------------------------------------------
# weighted spaces with exponential weight: solvable, complemented, reduced


def _case_weighted(params: dict) -> dict:
    assertions: list = []
    tables: dict = {}
    results: dict = {}
    rows = []
    verdict = None
    for dim in params["dim_sweep"]:
        n = np.arange(1, dim + 1, dtype=float)
        A = operators.diagonal(1.0 / n)
        f = (np.arange(1, dim + 1) % 2 == 0).astype(float)
        w = spaces.exp_decay_weight(dim)
        for p in (1, 2):
            sp = SpaceSpec(p, dim, weight=w)
            sweep = krylov.solvability_sweep(
                A, f, sp, params["m_max"],
                SweepThresholds(eps_solve_rel=params["eps_solve_rel"]),
            )
            rows.extend(_distance_rows(sweep, _p_label(p)))
            if dim == params["dim_sweep"][-1]:
                _check(
                    assertions,
                    f"distance_at_m10_p{p}",
                    sweep.distances[9],
                    params["decay_threshold"],
                    "<=",
                )
                verdict = sweep.verdict if p == 1 else verdict
    tables["distances"] = {"header": ["m", "distance", "norm", "N"], "rows": rows}

    dim = params["dim_sweep"][-1]
    evens = Mask(tuple(range(2, dim + 1, 2)))
    odds = evens.complement(dim)
    sp1 = SpaceSpec(1, dim, weight=spaces.exp_decay_weight(dim))
    f_vec = Vector(sp1, (np.arange(1, dim + 1) % 2 == 0).astype(float))
    part_m, part_g = spaces.decompose(f_vec, evens)
    exact_sum = bool(np.all(part_m.coords + part_g.coords == f_vec.coords))
    disjoint = not np.any((part_m.coords != 0) & (part_g.coords != 0))
    _check(assertions, "decompose_sum_exact", 0.0 if exact_sum else 1.0, 0.0, "<=")
    _check(assertions, "decompose_supports_disjoint", 0.0 if disjoint else 1.0, 0.0, "<=")
    overlap = set(evens.indices) & set(odds.indices)
    union = set(evens.indices) | set(odds.indices)
    _check(assertions, "mask_meet_trivial", len(overlap), 0, "<=")
    _check(assertions, "mask_join_full", len(union), dim, ">=")

    A = operators.diagonal(1.0 / np.arange(1, dim + 1, dtype=float))
    eye = np.eye(dim)
    k_basis = [eye[i - 1] for i in evens.indices]
    g_basis = [eye[i - 1] for i in odds.indices]
    reduced = krylov.check_reduced(A, k_basis, g_basis)
    _check(assertions, "complement_invariance_residual", reduced, 1e-12, "<=")
    results["reduced_residual"] = reduced
    results["verdict"] = verdict
    return {
        "tables": tables,
        "metrics": results,
        "residuals": {"reduced": reduced},
        "assertions": assertions,
        "verdict": verdict,
        "figures": [{"kind": "distances", "table": "distances"}],
    }


# ---------------------------------------------------------------------------
# shift by two: solvable but never Krylov solvable, distance exactly one


def _case_shift2(params: dict) -> dict:
    dim = params["dim"]
    assertions: list = []
    tables: dict = {}
    rows = []
    verdict = None
    A = operators.shift(2, dim)
    f = np.eye(dim)[1]  # e_2, giving datum g = e_4
    worst_dev = 0.0
    for p in (1, 2, math.inf):
        sp = SpaceSpec(p, dim)
        sweep = krylov.solvability_sweep(A, f, sp, params["m_max"])
        rows.extend(_distance_rows(sweep, _p_label(p)))
        worst_dev = max(worst_dev, max(abs(d - 1.0) for d in sweep.distances))
        if p == math.inf:
            verdict = sweep.verdict
    tables["distances"] = {"header": ["m", "distance", "norm", "N"], "rows": rows}
    _check(assertions, "distance_exactly_one", worst_dev, 1e-9, "<=")

    # user complement: the odd coordinates plus e_2, validated as a true
    # complement of the grade Krylov space span{e_4, e_6, ...}
    eye = np.eye(dim)
    complement = [eye[i] for i in range(0, dim, 2)] + [eye[1]]
    rep = krylov.krylov_intersection(A, np.eye(dim)[3], complement=complement)
    _check(assertions, "complement_dimensions_fill_space", rep.dim_K + rep.dim_G, dim, ">=")
    _check(assertions, "intersection_contains_blocked_direction", rep.dim_intersection, 1, ">=")
    return {
        "tables": tables,
        "metrics": {
            "verdict": verdict,
            "intersection": {
                "dim_K": rep.dim_K,
                "dim_G": rep.dim_G,
                "dim_AG": rep.dim_AG,
                "dim_intersection": rep.dim_intersection,
                "trivial": rep.trivial,
            },
        },
        "residuals": {},
        "assertions": assertions,
        "verdict": verdict,
        "figures": [{"kind": "distances", "table": "distances"}],
    }


# ---------------------------------------------------------------------------
# integration operator: quadrature projection equals the identity


def _case_volterra(params: dict) -> dict:
    assertions: list = []
    tables: dict = {}
    results: dict = {}
    zetas = [complex(z[0], z[1]) for z in params["zetas"]]
    grid_sizes = sorted({int(params["n_coarse"]), int(params["n"])})

    cross_rows = []
    for n in grid_sizes:
        V = operators.volterra_matrix(n, "rectangle")
        x = np.arange(1, n + 1) / n
        for zeta in zetas:
            direct = scipy.linalg.solve_triangular(
                V.to_dense() - zeta * np.eye(n), x.astype(complex), lower=True
            )
            exact = volterra_resolvent_exact(zeta, x, n)
            dev = float(np.abs(direct - exact).max())
            cross_rows.append([n, zeta.real, zeta.imag, dev, 5.0 / n])
            _check(assertions, f"resolvent_crosscheck_n{n}_zeta{zeta}", dev, 5.0 / n, "<=")
    tables["resolvent_crosscheck"] = {
        "header": ["n", "zeta_re", "zeta_im", "sup_deviation", "tolerance"],
        "rows": cross_rows,
    }

    n = int(params["n"])
    V = operators.volterra_matrix(n, "rectangle")
    x = np.arange(1, n + 1) / n
    contour = spectral.circle(0.0, 1.0, params["nodes"])
    pr = spectral.projection(V, contour)
    Pg = pr.P @ x
    rel = float(np.linalg.norm(Pg - x) / np.linalg.norm(x))
    dev_ident = operators.inf_norm(pr.P - np.eye(n))
    _check(assertions, "projection_fixes_datum", rel, params["projection_tolerance"], "<=")
    _check(assertions, "projection_is_identity", dev_ident, params["identity_tolerance"], "<=")
    _check(assertions, "projection_idempotent", pr.idempotency_residual, 1e-8, "<=")
    _check(assertions, "projection_commutes", pr.commutator_residual, 1e-8, "<=")

    # matrix route self-consistency: structured resolvent vs triangular solve
    from .resolvent import resolvent_direct

    zeta0 = zetas[0]
    toep = resolvent_direct(V, zeta0).value @ x.astype(complex)
    tri = scipy.linalg.solve_triangular(
        V.to_dense() - zeta0 * np.eye(n), x.astype(complex), lower=True
    )
    _check(assertions, "matrix_routes_agree", float(np.abs(toep - tri).max()), 1e-8, "<=")

    # recorded, not asserted: Euclidean Krylov distances of the continuum
    # solution (constant one) of the inverse problem with datum x
    sp2 = SpaceSpec(2, n)
    sweep = krylov.solvability_sweep(V, np.ones(n), sp2, params["m_sweep"])
    tables["distances"] = {
        "header": ["m", "distance", "norm", "N"],
        "rows": _distance_rows(sweep, "2"),
    }
    results.update(
        {
            "projection_rank": pr.rank,
            "projection_deviation_from_identity": dev_ident,
            "datum_projection_relative_error": rel,
            "quadrature_count": pr.quadrature_count,
            "quadrature_rule": "rectangle",
            "stencil": "(Vx)_i = (1/n) * sum_{j<i} x_j on the grid x_i = i/n",
        }
    )
    return {
        "tables": tables,
        "metrics": results,
        "residuals": {
            "idempotency": pr.idempotency_residual,
            "commutator": pr.commutator_residual,
        },
        "assertions": assertions,
        "verdict": None,
        "figures": [
            {"kind": "contour", "center": [0.0, 0.0], "radius": 1.0,
             "nodes": params["nodes"], "spectrum": [[0.0, 0.0]]},
            {"kind": "distances", "table": "distances"},
        ],
    }


# ---------------------------------------------------------------------------
# catalog and runner


CATALOG: dict[str, CaseStudy] = {
    "shift_not_solvable": CaseStudy(
        id="shift_not_solvable",
        title="Forward shift: datum outside the range, first coordinate blocked",
        expected_verdict="not-in-Krylov",
        defaults={"dim": 200, "m_max": 20, "dim_sweep": [50, 200]},
        runner=_case_shift,
        notes="The range of the forward shift misses the first canonical "
        "vector, and every Krylov vector of the shifted datum vanishes on "
        "coordinate one, so the solution keeps sup-distance one.",
    ),
    "diag_solvable": CaseStudy(
        id="diag_solvable",
        title="Diagonal 1/sqrt(n): solution reachable inside the Krylov closure",
        expected_verdict="solvable-in-Krylov",
        defaults={
            "m_max": 24,
            "dim_sweep": [1000, 10000],
            "eps_solve_rel": 0.01,
            "floor_frac": 0.03,
            "final_threshold": 0.25,
        },
        runner=_case_diag_solvable,
        notes="Powers of the datum separate points and decay, so their span "
        "fills the space of decaying sequences that contains the solution; "
        "sup-distances fall fast and the minimiser is LP-feasible.",
    ),
    "diag_not_solvable": CaseStudy(
        id="diag_not_solvable",
        title="Diagonal 1/sqrt(n): constant solution escapes the Krylov closure",
        expected_verdict="not-in-Krylov",
        defaults={
            "m_max": 24,
            "verdict_m_max": 48,
            "dim_sweep": [1000, 10000],
            "eps_solve_rel": 0.01,
            "floor_frac": 0.025,
            "floor_baseline": 0.013,
        },
        runner=_case_diag_not_solvable,
        notes="The constant solution does not decay, so distances stagnate at "
        "a floor that grows with the truncation size instead of collapsing; "
        "the floor baseline is the recorded LP-oracle value at N=10^4.",
    ),
    "weighted_lp": CaseStudy(
        id="weighted_lp",
        title="Exponentially weighted spaces: masked complement, reduced operator",
        expected_verdict="solvable-in-Krylov",
        defaults={
            "m_max": 12,
            "dim_sweep": [30, 60],
            "eps_solve_rel": 1e-5,
            "decay_threshold": 1e-6,
        },
        runner=_case_weighted,
        notes="Even-coordinate data under the diagonal 1/n stay supported on "
        "the evens; the coordinate mask yields an exact complement that the "
        "operator leaves invariant, and weighted distances collapse quickly.",
    ),
    "shift2_not_ksolvable": CaseStudy(
        id="shift2_not_ksolvable",
        title="Shift by two: complemented Krylov space, distance exactly one",
        expected_verdict="not-in-Krylov",
        defaults={"dim": 64, "m_max": 20},
        runner=_case_shift2,
        notes="Krylov vectors live on even coordinates from four upward while "
        "the solution sits on coordinate two: disjoint supports force "
        "distance one in every norm, and the blocked direction shows up as a "
        "nontrivial intersection with the image of the complement.",
    ),
    "volterra": CaseStudy(
        id="volterra",
        title="Discretised integration operator: full-plane projection is the identity",
        expected_verdict=None,
        defaults={
            "n": 1000,
            "n_coarse": 200,
            "nodes": 256,
            "m_sweep": 8,
            "zetas": [[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0]],
            "projection_tolerance": 5e-3,
            "identity_tolerance": 1e-2,
        },
        runner=_case_volterra,
        notes="The rectangle-rule discretisation is nilpotent, so a contour "
        "around the origin encloses the whole spectrum and its projection is "
        "the identity; the matrix resolvent is cross-checked against the "
        "analytic kernel formula on the same grid.",
    ),
}


def case_ids() -> list[str]:
    return sorted(CATALOG)


def _merge_params(case: CaseStudy, overrides: dict | None) -> dict:
    params = dict(case.defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ConfigError(
                f"unknown parameter {key!r} for case {case.id}; "
                f"known: {sorted(params)}"
            )
        params[key] = value
    return params


def run_case(case_id: str, overrides: dict | None = None) -> dict:
    """Run one catalog case and assemble its report dict (no file output)."""
    if case_id not in CATALOG:
        raise ConfigError(f"unknown case {case_id!r}; known: {case_ids()}")
    case = CATALOG[case_id]
    params = _merge_params(case, overrides)
    body = case.runner(params)
    verdict_ok = case.expected_verdict is None or body.get("verdict") == case.expected_verdict
    assertions_ok = all(a["passed"] for a in body["assertions"])
    report = {
        "id": case.id,
        "title": case.title,
        "notes": case.notes,
        "params": params,
        "expected_verdict": case.expected_verdict,
        "verdict_matches": verdict_ok,
        "passed": bool(verdict_ok and assertions_ok),
        **body,
    }
    return report
