"""Acceptance suite: one test per shipping criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.  Every
tolerance is pinned here; quantitative thresholds that the underlying theory
leaves open (the dichotomy heights) are the recorded oracle baselines, and the
asserted properties are monotonicity, floors and the ordering gap.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from kbl import cases, cli, krylov, operators, resolvent, spectral
from kbl.krylov import build_krylov, check_density_criterion, krylov_intersection
from kbl.operators import diagonal, inf_norm, volterra_matrix, volterra_resolvent_exact
from kbl.resolvent import (
    kclass_inverse,
    resolvent_direct,
    resolvent_laurent,
    resolvent_neumann_step,
)
from kbl.spaces import SpaceSpec
from kbl.spectral import circle, projection


def _report(criterion: str, passed: bool, detail: str):
    print(f"{'PASS' if passed else 'FAIL'}: {criterion} - {detail}")
    assert passed, f"{criterion}: {detail}"


def test_criterion_1_volterra_projection():
    started = time.perf_counter()
    n, nodes = 1000, 256
    V = volterra_matrix(n, "rectangle")
    pr = projection(V, circle(0.0, 1.0, nodes))
    x = np.arange(1, n + 1) / n
    rel = np.linalg.norm(pr.P @ x - x) / np.linalg.norm(x)
    dev = inf_norm(pr.P - np.eye(n))
    elapsed = time.perf_counter() - started
    ok = rel <= 5e-3 and dev <= 1e-2 and elapsed <= 60.0
    _report(
        "criterion 1 (projection of nilpotent truncation is the identity)",
        ok,
        f"|Pg-g|/|g|={rel:.2e} (<=5e-3), |P-I|={dev:.2e} (<=1e-2), {elapsed:.1f}s (<=60s)",
    )


def test_criterion_2_volterra_resolvent_crosscheck():
    import scipy.linalg

    n = 1000
    V = volterra_matrix(n, "rectangle")
    x = np.arange(1, n + 1) / n
    worst = 0.0
    for zeta in (1.0, -1.0, 2.0j):
        direct = scipy.linalg.solve_triangular(
            V.to_dense() - zeta * np.eye(n), x.astype(complex), lower=True
        )
        exact = volterra_resolvent_exact(zeta, x, n)
        worst = max(worst, float(np.abs(direct - exact).max()))
    _report(
        "criterion 2 (matrix resolvent matches analytic kernel)",
        worst <= 5.0 / n,
        f"sup deviation {worst:.2e} <= {5.0 / n:.2e} at zeta in {{1, -1, 2i}}",
    )


def test_criterion_3_exact_distances():
    N = 64
    A2 = operators.shift(2, N)
    kb = build_krylov(A2, np.eye(N)[3], 20)
    f = np.eye(N)[1]
    worst = 0.0
    for p in (1, 2, math.inf):
        for m in range(1, 21):
            res = krylov.distance_to_krylov(f, kb, SpaceSpec(p, N), m=m)
            worst = max(worst, abs(res.distance - 1.0))
    shift_ok = worst <= 1e-9

    A1 = operators.shift(1, 200)
    sweep = krylov.solvability_sweep(A1, np.eye(200)[0], SpaceSpec(math.inf, 200), 20)
    floor = min(sweep.distances)
    _report(
        "criterion 3 (exact distances for the shift cases)",
        shift_ok and floor >= 1.0 - 1e-9,
        f"shift-2 worst |d-1|={worst:.1e} (<=1e-9); shift-1 floor={floor:.12f} (>=1-1e-9)",
    )


def test_criterion_4_dichotomy_sweep():
    started = time.perf_counter()
    N, M = 10_000, 24
    n = np.arange(1, N + 1, dtype=float)
    A = diagonal(1.0 / np.sqrt(n))
    sp = SpaceSpec(math.inf, N)
    solv = krylov.solvability_sweep(A, 1.0 / np.sqrt(n), sp, M)
    unsolv = krylov.solvability_sweep(A, np.ones(N), sp, M)
    elapsed = time.perf_counter() - started

    ds = solv.distances
    monotone = all(ds[i + 1] <= ds[i] + 1e-9 for i in range(M - 1))
    final_ok = ds[-1] <= 0.25
    floor = min(unsolv.distances)
    # recorded oracle baseline for the floor at N=1e4 (cross-checked against
    # an independent LP solver; the tight infinite-dimensional floor is not
    # attainable on a truncation, so the gap below is the decisive property)
    floor_ok = floor >= 0.013
    gap_ok = ds[-1] < floor / 4.0
    ok = monotone and final_ok and floor_ok and gap_ok and elapsed <= 600.0
    _report(
        "criterion 4 (dichotomy sweep at N=1e4, M=24)",
        ok,
        f"monotone={monotone}, d24={ds[-1]:.2e} (<=0.25), floor={floor:.4f} "
        f"(>=0.013 baseline), gap d24<floor/4={gap_ok}, {elapsed:.1f}s (<=600s)",
    )


def test_criterion_5_polynomial_inverse():
    D = diagonal([2.0, 3.0, 4.0])
    ap = kclass_inverse(D, 2e-7, waypoints=[5.0 - 3.0j, -3.0j])
    res_named = inf_norm(ap.value @ D.to_dense() - np.eye(3))

    quartet = diagonal([1.0, 1j, -1.0, -1j])
    w = [2.5 * np.exp(1j * np.pi / 4), 0.7071 * np.exp(1j * np.pi / 4)]
    ap2 = kclass_inverse(quartet, 5e-7, waypoints=w)
    res_quartet = inf_norm(ap2.value @ quartet.to_dense() - np.eye(4))

    rng = np.random.default_rng(2024)
    covered = 0
    trials = 100
    for _ in range(trials):
        n = int(rng.integers(2, 8))
        sigma = -rng.uniform(0.5, 2.2, n) + 1j * rng.uniform(-1.0, 1.0, n)
        A = diagonal(sigma)
        ap_t = kclass_inverse(A, 1e-6)
        actual = inf_norm(ap_t.value - np.diag(1.0 / sigma))
        if actual <= ap_t.error_bound:
            covered += 1
    ok = res_named <= 1e-6 and res_quartet <= 1e-6 and covered == trials
    _report(
        "criterion 5 (certified polynomial inverses)",
        ok,
        f"diag(2,3,4) residual={res_named:.2e}, quartet residual={res_quartet:.2e} "
        f"(<=1e-6); bound covered actual error in {covered}/{trials} seeded trials",
    )


def test_criterion_6_series_within_certificates():
    rng = np.random.default_rng(77)
    trials = 100
    laurent_ok = neumann_ok = 0
    for _ in range(trials):
        n = int(rng.integers(1, 8))
        sigma = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        A = diagonal(sigma)
        spr = float(np.abs(sigma).max())
        zeta = (2.0 * spr if spr else 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        order = int(rng.integers(5, 40))
        rp = resolvent_laurent(A, zeta, order)
        direct = resolvent_direct(A, zeta).value
        if inf_norm(rp.value - direct) <= rp.error_bound:
            laurent_ok += 1

        z0 = zeta  # comfortably outside the spectrum
        r0 = resolvent_direct(A, z0)
        dist = float(np.abs(sigma - z0).min())
        z1 = z0 + 0.6 * dist * np.exp(1j * rng.uniform(0, 2 * np.pi))
        r1 = resolvent_neumann_step(r0, z1, int(rng.integers(10, 50)))
        direct1 = resolvent_direct(A, z1).value
        if inf_norm(r1.value - direct1) <= r1.error_bound:
            neumann_ok += 1

    lhalf = resolvent_laurent(diagonal([0.5]), 2.0, 40).value[0, 0]
    r0 = resolvent_laurent(diagonal([1.0]), 3.0, 80)
    nhalf = resolvent_neumann_step(r0, 2.5, 60).value[0, 0]
    scalars_ok = abs(lhalf + 2.0 / 3.0) <= 1e-12 and abs(nhalf + 2.0 / 3.0) <= 1e-12
    ok = laurent_ok == trials and neumann_ok == trials and scalars_ok
    _report(
        "criterion 6 (series agree with direct solves within their bounds)",
        ok,
        f"laurent {laurent_ok}/{trials}, recentred {neumann_ok}/{trials}, "
        f"scalar -2/3 identities to 1e-12: {scalars_ok}",
    )


def test_criterion_7_projection_algebra():
    worst_idem = worst_comm = 0.0
    shipped = [
        (diagonal([2.0, 0.5, 0.4]), circle(2.0, 0.5, 64)),
        (diagonal([2.0, 2.0, 0.5]), circle(2.0, 0.5, 64)),
        (diagonal([1.0, -1.0, 0.3 + 0.4j]), circle(1.0, 0.5, 128)),
        (volterra_matrix(200, "rectangle"), circle(0.0, 1.0, 128)),
    ]
    for A, contour in shipped:
        pr = projection(A, contour)
        worst_idem = max(worst_idem, pr.idempotency_residual)
        worst_comm = max(worst_comm, pr.commutator_residual)

    A = diagonal([2.0, 0.5, -1.0])
    p1 = projection(A, circle(2.0, 0.5, 128)).P
    p2 = projection(A, circle(0.5, 0.5, 128)).P
    both = projection(A, circle(1.25, 1.6, 256)).P
    additive = inf_norm(p1 + p2 - both)

    rank = projection(diagonal([2.0, 2.0, 0.5]), circle(2.0, 0.5, 64)).rank
    ok = worst_idem <= 1e-8 and worst_comm <= 1e-8 and additive <= 1e-8 and rank == 2
    _report(
        "criterion 7 (projection algebra)",
        ok,
        f"|P^2-P|<={worst_idem:.1e}, |PA-AP|<={worst_comm:.1e}, "
        f"additivity={additive:.1e} (<=1e-8), enclosed rank {rank} == multiplicity 2",
    )


def test_criterion_8_intersection_theorem_finite_render():
    rng = np.random.default_rng(4321)
    trials = 0
    matched = 0
    member_ok = 0
    trivial_count = 0
    while trials < 100:
        N = int(rng.integers(2, 7))
        if trials % 3 == 2 and N >= 4:
            half = N // 2
            mat = np.zeros((N, N))
            mat[:half, :half] = rng.standard_normal((half, half)) + np.eye(half) * 2.5
            mat[half:, half:] = rng.standard_normal((N - half, N - half)) + np.eye(N - half) * 2.5
            g = np.zeros(N)
            g[:half] = rng.standard_normal(half)
        else:
            mat = rng.standard_normal((N, N)) + np.eye(N) * 2.5
            g = rng.standard_normal(N)
        if abs(np.linalg.det(mat)) < 1e-6 or not np.any(g):
            continue
        trials += 1
        A = operators.dense(mat)
        rep = krylov_intersection(A, g)
        f = np.linalg.solve(mat, g)
        kb = build_krylov(A, g, N + 1)
        Q = kb.ortho
        member = np.linalg.norm(f - Q @ (Q.conj().T @ f)) <= 1e-8 * np.linalg.norm(f)
        if rep.trivial:
            trivial_count += 1
            if member:
                member_ok += 1
        if check_density_criterion(A, g) == member:
            matched += 1
    ok = member_ok == trivial_count and trivial_count >= 100 and matched == trials
    _report(
        "criterion 8 (trivial intersection forces a Krylov solution)",
        ok,
        f"{member_ok}/{trivial_count} trivial-intersection instances had the solution in "
        f"the grade space; density criterion matched membership in {matched}/{trials}",
    )


def test_criterion_9_case_reports_deterministic(tmp_path):
    # verdict thresholds are truncation-calibrated config, so the shrunken
    # determinism runs carry floors matched to their own oracle baselines
    overrides = {
        "diag_solvable": ["dim_sweep=[500,2000]"],
        "diag_not_solvable": [
            "dim_sweep=[500,2000]", "verdict_m_max=48", "floor_baseline=0.003",
            "eps_solve_rel=0.002", "floor_frac=0.003",
        ],
        "volterra": ["n=200", "n_coarse=100", "nodes=128"],
        "shift_not_solvable": [],
        "shift2_not_ksolvable": [],
        "weighted_lp": [],
    }
    identical = []
    for cid, sets in overrides.items():
        out_a = str(tmp_path / f"{cid}_a")
        out_b = str(tmp_path / f"{cid}_b")
        args = ["case", cid, "--no-figures"]
        for s in sets:
            args += ["--set", s]
        rc_a = cli.main(args + ["--out", out_a])
        rc_b = cli.main(args + ["--out", out_b])
        name = f"case_{cid}_report.json"
        with open(os.path.join(out_a, name), "rb") as fa, open(
            os.path.join(out_b, name), "rb"
        ) as fb:
            same = fa.read() == fb.read()
        identical.append(same and rc_a == rc_b == 0)
    ok = all(identical)
    _report(
        "criterion 9 (byte-identical reports on rerun)",
        ok,
        f"{sum(identical)}/{len(identical)} cases byte-identical across reruns",
    )
