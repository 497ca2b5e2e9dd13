import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kbl import optim
from kbl.errors import ComplexDataError, KblError, LpSizeError
from kbl.optim import LinearProgram, chebyshev_distance, l1_distance, solve_lp


def test_one_point_chebyshev_fit():
    # min t with |1 - c| <= t: optimum t* = 0
    lp = LinearProgram(
        c=[0.0, 1.0],
        A_ub=[[1.0, -1.0], [-1.0, -1.0]],
        b_ub=[1.0, -1.0],
        nonneg=[False, False],
    )
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(0.0, abs=1e-9)
    assert sol.x[0] == pytest.approx(1.0, abs=1e-9)


def test_simple_bound():
    sol = solve_lp(LinearProgram([1.0], [[-1.0]], [-3.0], [False]))
    assert sol.value == pytest.approx(3.0, abs=1e-12)


def test_unmatchable_second_coordinate():
    d, _ = chebyshev_distance(np.array([1.0, 1.0]), [np.array([1.0, 0.0])])
    assert d == pytest.approx(1.0, abs=1e-9)


def test_infeasible_detected():
    lp = LinearProgram([0.0], [[1.0], [-1.0]], [1.0, -2.0], [False])
    assert solve_lp(lp).status == "infeasible"


def test_unbounded_detected():
    lp = LinearProgram([-1.0], [[0.0]], [1.0], [True])
    assert solve_lp(lp).status == "unbounded"


def test_equality_rows_and_duality_gap():
    rng = np.random.default_rng(0)
    for trial in range(20):
        n = rng.integers(2, 6)
        m = rng.integers(1, 4)
        A = rng.standard_normal((m, n))
        x_feas = rng.uniform(0.2, 1.0, n)
        b = A @ x_feas
        c = rng.standard_normal(n) + 2.0  # keep the problem bounded on x >= 0
        lp = LinearProgram(c, np.zeros((0, n)), np.zeros(0), np.ones(n, dtype=bool), A_eq=A, b_eq=b)
        sol = solve_lp(lp)
        if sol.status != "optimal":
            continue
        gap = abs(sol.value - float(b @ sol.dual_eq))
        assert gap <= 1e-8 * (1.0 + abs(sol.value))
        assert np.abs(A @ sol.x - b).max() <= 1e-8


def test_duality_gap_on_inequality_instances():
    rng = np.random.default_rng(1)
    for trial in range(20):
        n, m = 4, 6
        A = rng.standard_normal((m, n))
        b = A @ rng.uniform(0.1, 1.0, n) + rng.uniform(0.1, 1.0, m)
        c = rng.uniform(0.5, 2.0, n)
        sol = solve_lp(LinearProgram(c, A, b, np.ones(n, dtype=bool)))
        assert sol.status == "optimal"
        gap = abs(sol.value - float(b @ sol.dual))
        assert gap <= 1e-8 * (1.0 + abs(sol.value))


def test_chebyshev_distance_of_member_vanishes():
    rng = np.random.default_rng(2)
    B = rng.standard_normal((15, 3))
    f = B @ np.array([0.3, -1.2, 2.0])
    d, c = chebyshev_distance(f, list(B.T))
    assert d <= 1e-9
    assert np.abs(f - B @ c).max() <= 1e-8


def test_chebyshev_disjoint_support():
    d, c = chebyshev_distance(np.eye(7)[1], [np.eye(7)[3], np.eye(7)[5]])
    assert d == pytest.approx(1.0, abs=1e-9)
    assert np.abs(c).max() <= 1e-9


def test_chebyshev_against_grid_scan():
    f = np.ones(3)
    b = np.array([1.0, 0.5, 1 / 3])
    grid = np.linspace(-5, 5, 200001)
    scan = np.max(np.abs(f[:, None] - b[:, None] * grid[None, :]), axis=0).min()
    d, _ = chebyshev_distance(f, [b])
    assert d == pytest.approx(scan, abs=1e-4)


def test_l1_examples():
    rng = np.random.default_rng(3)
    B = rng.standard_normal((10, 2))
    f = B @ np.array([1.5, -0.5])
    d, _ = l1_distance(f, list(B.T))
    assert d <= 1e-9
    d, _ = l1_distance(np.eye(5)[1], [np.eye(5)[3]])
    assert d == pytest.approx(1.0, abs=1e-9)
    d, _ = l1_distance(np.eye(3)[0], [np.eye(3)[1]], weight=np.exp(-np.arange(1, 4)))
    assert d == pytest.approx(np.exp(-1), abs=1e-9)


def test_l1_weighted_against_scipy():
    from scipy.optimize import linprog

    rng = np.random.default_rng(4)
    for trial in range(10):
        n, k = 12, 3
        B = rng.standard_normal((n, k))
        f = rng.standard_normal(n)
        w = rng.uniform(0.1, 2.0, n)
        mine, _ = l1_distance(f, list(B.T), weight=w)
        c = np.concatenate([np.zeros(k), w])
        A_ub = np.block([[B, -np.eye(n)], [-B, -np.eye(n)]])
        b_ub = np.concatenate([f, -f])
        ref = linprog(
            c, A_ub=A_ub, b_ub=b_ub,
            bounds=[(None, None)] * k + [(0, None)] * n, method="highs",
        )
        assert mine == pytest.approx(ref.fun, abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_distance_monotone_in_basis(data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10_000)))
    n = data.draw(st.integers(3, 12))
    f = rng.standard_normal(n)
    cols = [rng.standard_normal(n) for _ in range(4)]
    previous = None
    for k in range(1, 5):
        d, _ = chebyshev_distance(f, cols[:k])
        if previous is not None:
            assert d <= previous + 1e-9
        previous = d


def test_chebyshev_zero_iff_least_squares_zero():
    rng = np.random.default_rng(5)
    for trial in range(25):
        n = int(rng.integers(5, 50))
        k = int(rng.integers(1, min(6, n)))
        B = rng.standard_normal((n, k))
        inside = bool(trial % 2)
        f = B @ rng.standard_normal(k) if inside else rng.standard_normal(n)
        d, _ = chebyshev_distance(f, list(B.T))
        resid = np.linalg.lstsq(B, f, rcond=None)[1]
        ls_zero = (float(resid[0]) if resid.size else 0.0) <= 1e-18
        assert (d <= 1e-9) == ls_zero


def test_constraint_cap():
    n = 3
    with pytest.raises(LpSizeError):
        solve_lp(
            LinearProgram(np.ones(n), np.ones((6000, n)), np.ones(6000), np.ones(n, bool))
        )


def test_complex_input_rejected():
    with pytest.raises(ComplexDataError):
        chebyshev_distance(np.array([1.0 + 1j, 0.0]), [np.array([1.0, 0.0])])
    with pytest.raises(ComplexDataError):
        l1_distance(np.array([1.0, 0.0]), [np.array([1j, 0.0])])


def test_empty_basis_rejected():
    with pytest.raises(KblError):
        chebyshev_distance(np.ones(3), [])


def test_solver_determinism():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((8, 5))
    b = rng.standard_normal(8) + 2.0
    c = rng.standard_normal(5)
    lp = LinearProgram(c, A, b, np.ones(5, dtype=bool))
    s1, s2 = solve_lp(lp), solve_lp(lp)
    assert s1.iterations == s2.iterations
    assert s1.value == s2.value
    assert np.array_equal(s1.x, s2.x)


def test_format_lp_mentions_all_rows():
    lp = LinearProgram([1.0, 2.0], [[1.0, 0.0]], [3.0], [True, False], A_eq=[[0.0, 1.0]], b_eq=[1.0])
    text = optim.format_lp(lp)
    assert "<=" in text and "==" in text and "x0 >= 0" in text and "x1 free" in text
