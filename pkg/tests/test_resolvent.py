import numpy as np
import pytest

from kbl import krylov, operators, resolvent, spaces
from kbl.errors import DegreeCapError, MarginError, PreconditionError, SingularityError
from kbl.operators import diagonal, inf_norm, shift
from kbl.resolvent import (
    ApproxOperator,
    apply_shifted_power,
    continue_resolvent,
    extract_polynomial,
    formal_degree,
    kclass_inverse,
    plan_path,
    resolvent_direct,
    resolvent_laurent,
    resolvent_neumann_step,
)


def test_direct_scalar_value():
    rp = resolvent_direct(diagonal([0.5]), 2.0)
    assert rp.value[0, 0] == pytest.approx(-2.0 / 3.0)
    assert rp.residual <= 1e-12


def test_direct_nilpotent_matches_finite_sum():
    S = shift(1, 3)
    rp = resolvent_direct(S, 1.0)
    dense = S.to_dense()
    expected = -(np.eye(3) + dense + dense @ dense)
    assert np.allclose(rp.value, expected, atol=1e-12)


def test_direct_rejects_spectrum_point():
    with pytest.raises(SingularityError):
        resolvent_direct(diagonal([1.0, 2.0]), 2.0)


def test_direct_residual_certificate():
    rng = np.random.default_rng(0)
    for trial in range(10):
        n = int(rng.integers(2, 12))
        mat = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = operators.dense(mat)
        zeta = 3.0 + float(rng.standard_normal())
        rp = resolvent_direct(A, zeta, residual="full")
        true = np.linalg.inv(mat - zeta * np.eye(n))
        assert rp.residual <= 1e-9 * (1.0 + inf_norm(mat - zeta * np.eye(n)) * inf_norm(rp.value))
        if rp.error_bound is not None:
            assert inf_norm(rp.value - true) <= rp.error_bound + 1e-13


def test_toeplitz_fast_path_matches_triangular_solve():
    import scipy.linalg

    n = 300
    V = operators.volterra_matrix(n)
    zeta = 1.0 - 0.5j
    rp = resolvent_direct(V, zeta)
    rhs = np.arange(1, n + 1) / n
    tri = scipy.linalg.solve_triangular(
        V.to_dense() - zeta * np.eye(n), rhs.astype(complex), lower=True
    )
    assert np.abs(rp.value @ rhs - tri).max() <= 1e-10


def test_laurent_geometric_scalar():
    A = diagonal([0.5])
    rp = resolvent_laurent(A, 2.0, 20)
    assert abs(rp.value[0, 0] + 2.0 / 3.0) <= 1e-6
    rp = resolvent_laurent(A, 2.0, 40)
    assert abs(rp.value[0, 0] + 2.0 / 3.0) <= 1e-12


def test_laurent_zero_operator_single_term():
    rp = resolvent_laurent(diagonal([0.0, 0.0]), 1.5, 0)
    assert np.allclose(rp.value, -np.eye(2) / 1.5)
    assert rp.error_bound <= 1e-13


def test_laurent_bound_covers_truth_random_diagonal():
    rng = np.random.default_rng(1)
    for trial in range(20):
        n = int(rng.integers(1, 8))
        sigma = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        A = diagonal(sigma)
        spr = float(np.abs(sigma).max())
        zeta = 2.0 * spr * np.exp(1j * rng.uniform(0, 2 * np.pi)) if spr else 1.0
        order = int(rng.integers(5, 40))
        rp = resolvent_laurent(A, zeta, order)
        direct = resolvent_direct(A, zeta).value
        assert inf_norm(rp.value - direct) <= rp.error_bound


def test_laurent_margin_errors():
    A = diagonal([1.0, 2.0])
    with pytest.raises(MarginError):
        resolvent_laurent(A, 1.5, 10)  # |zeta| below spr bound


def test_neumann_scalar_geometric_identity():
    A = diagonal([1.0])
    r0 = resolvent_laurent(A, 3.0, 60)
    r1 = resolvent_neumann_step(r0, 2.5, 40)
    assert abs(r1.value[0, 0] + 2.0 / 3.0) <= 1e-12
    assert abs(r1.value[0, 0] + 2.0 / 3.0) <= r1.error_bound


def test_neumann_same_point_returns_input():
    A = diagonal([1.0, 2.0])
    r0 = resolvent_direct(A, 4.0)
    assert resolvent_neumann_step(r0, 4.0, 7) is r0


def test_neumann_matches_direct_within_bound():
    A = diagonal(1 / np.sqrt(np.arange(1, 30)))
    r0 = resolvent_direct(A, 2.0)
    r1 = resolvent_neumann_step(r0, 1.5 + 0.3j, 40)
    direct = resolvent_direct(A, 1.5 + 0.3j).value
    assert inf_norm(r1.value - direct) <= r1.error_bound
    assert inf_norm(r1.value - direct) <= 1e-9


def test_neumann_ratio_guard():
    A = diagonal([1.0])
    r0 = resolvent_direct(A, 2.0)  # distance 1 to the spectrum
    with pytest.raises(MarginError):
        resolvent_neumann_step(r0, 2.0 + 0.9, 10)


def test_plan_geometry_matches_sampled_distance():
    A = diagonal([1.0])
    plan = plan_path(A, 3.0, -1.0, waypoints=[2j], eps_total=1e-8)
    # dense-sampling oracle for the polyline distance to the point 1
    pts = []
    for a, b in zip(plan.vertices[:-1], plan.vertices[1:]):
        t = np.linspace(0.0, 1.0, 20001)
        pts.append(a + t * (b - a))
    sampled = min(np.abs(np.concatenate(pts) - 1.0).min() for _ in [0])
    assert plan.eta == pytest.approx(sampled, abs=1e-6)
    assert all(
        abs(b - a) <= plan.eta / 2 + 1e-12
        for a, b in zip(plan.centers[:-1], plan.centers[1:])
    )
    assert plan.centers[0] == 3.0 and plan.centers[-1] == -1.0


def test_plan_single_ball_for_equal_endpoints():
    plan = plan_path(diagonal([1.0]), 3.0, 3.0)
    assert len(plan.centers) == 1 and plan.orders == ()


def test_plan_rejects_path_through_spectrum():
    quartet = diagonal([1.0, 1j, -1.0, -1j])
    with pytest.raises(MarginError):
        plan_path(quartet, 3.0, 0.0)  # straight segment passes through 1
    # bending through the diagonal gap clears the spectrum
    w = [2.5 * np.exp(1j * np.pi / 4), 0.7071 * np.exp(1j * np.pi / 4)]
    plan = plan_path(quartet, 3.0, 0.0, waypoints=w)
    assert plan.eta > 0.3


def test_plan_requires_oracle():
    rng = np.random.default_rng(2)
    A = operators.dense(rng.standard_normal((3, 3)))
    with pytest.raises(PreconditionError):
        plan_path(A, 3.0, 2.0)


def test_continuation_reaches_inverse_of_quartet():
    quartet = diagonal([1.0, 1j, -1.0, -1j])
    w = [2.5 * np.exp(1j * np.pi / 4), 0.7071 * np.exp(1j * np.pi / 4)]
    plan = plan_path(quartet, 2.0, 0.0, waypoints=w, eps_total=1e-7)
    ap = continue_resolvent(quartet, plan)
    direct = np.linalg.inv(quartet.to_dense())
    assert inf_norm(ap.value - direct) <= 1e-6
    assert inf_norm(ap.value - direct) <= ap.error_bound


def test_continuation_degenerate_plan_equals_seed():
    A = diagonal([0.5, 0.25])
    plan = plan_path(A, 2.0, 2.0, eps_total=1e-8)
    ap = continue_resolvent(A, plan)
    direct = resolvent_direct(A, 2.0).value
    assert inf_norm(ap.value - direct) <= ap.error_bound


def test_continuation_vector_form_stays_in_krylov_closure():
    import math

    N = 500
    n = np.arange(1, N + 1, dtype=float)
    A = diagonal(1 / np.sqrt(n))
    g = 1 / n
    plan = plan_path(A, 2.0, -0.5, waypoints=[1.5 - 1.5j, -0.5 - 1.5j], eps_total=1e-8)
    av = continue_resolvent(A, plan, g=g)
    direct = resolvent_direct(A, -0.5).value @ g
    assert np.abs(av.value - direct).max() <= av.error_bound
    kb = krylov.build_krylov(A, g, 20)
    res = krylov.distance_to_krylov(av.value.real, kb, spaces.SpaceSpec(math.inf, N))
    assert res.distance <= 1e-4


def test_kclass_named_instances():
    D = diagonal([2.0, 3.0, 4.0])
    ap = kclass_inverse(D, 2e-7, waypoints=[5.0 - 3.0j, -3.0j])
    assert inf_norm(ap.value @ D.to_dense() - np.eye(3)) <= 1e-6
    ident = diagonal([1.0, 1.0])
    ap2 = kclass_inverse(ident, 1e-7, waypoints=[1.0 + 0.9j])
    assert inf_norm(ap2.value - np.eye(2)) <= 1e-6


def test_kclass_rejects_zero_eigenvalue():
    with pytest.raises(PreconditionError):
        kclass_inverse(diagonal([0.0, 1.0]), 1e-6)


def test_extract_polynomial_laurent_coefficients():
    rp = resolvent_laurent(diagonal([0.5, 0.25]), 2.0, 3)
    ap = ApproxOperator(
        A=rp.A, value=rp.value, provenance=rp.provenance,
        error_bound=rp.error_bound, degree_bound=3,
    )
    coeffs = extract_polynomial(ap)
    assert np.allclose(coeffs, [-0.5, -0.25, -0.125, -0.0625])


def test_extract_polynomial_recentring_degree():
    A = diagonal([0.4, 0.2])
    seed = resolvent_laurent(A, 2.0, 1)  # degree-1 seed
    stepped = resolvent_neumann_step(seed, 1.8, 1)  # one recentring of order 1
    assert formal_degree(stepped.provenance) <= 3
    ap = ApproxOperator(
        A=A, value=stepped.value, provenance=stepped.provenance,
        error_bound=stepped.error_bound,
    )
    coeffs = extract_polynomial(ap)
    # symbolic oracle: sum_n (z - z0)^n (seed poly)^(n+1)
    poly = np.polynomial.polynomial
    base = np.array([-1 / 2.0, -1 / 4.0], dtype=complex)
    expected = poly.polyadd(base, (1.8 - 2.0) * poly.polymul(base, base))
    assert np.allclose(coeffs, expected)


def test_extract_polynomial_cap_refusal():
    quartet = diagonal([1.0, 1j, -1.0, -1j])
    w = [2.5 * np.exp(1j * np.pi / 4), 0.7071 * np.exp(1j * np.pi / 4)]
    plan = plan_path(quartet, 2.0, 0.0, waypoints=w, eps_total=1e-7)
    ap = continue_resolvent(quartet, plan)
    with pytest.raises(DegreeCapError) as err:
        extract_polynomial(ap)
    assert str(ap.degree_bound) in str(err.value)


def test_commutation_with_powers():
    rng = np.random.default_rng(3)
    for A in (diagonal(rng.standard_normal(8)), operators.dense(rng.standard_normal((8, 8)))):
        zeta = 4.0 + 2.0j
        R = resolvent_direct(A, zeta).value
        dense = A.to_dense()
        f = rng.standard_normal(8)
        Ak = np.eye(8)
        for k in range(1, 6):
            Ak = Ak @ dense
            lhs = R @ (Ak @ f)
            rhs = Ak @ (R @ f)
            scale = np.abs(rhs).max() + 1.0
            assert np.abs(lhs - rhs).max() <= 1e-8 * scale


def test_resolvent_image_stays_in_krylov_space():
    # block instance where the grade space is a strict invariant subspace
    rng = np.random.default_rng(4)
    mat = np.zeros((6, 6), dtype=complex)
    mat[:3, :3] = np.diag([1.0, 2.0, 3.0])
    mat[3:, 3:] = rng.standard_normal((3, 3))
    A = operators.dense(mat, spectrum=np.concatenate([[1, 2, 3], np.linalg.eigvals(mat[3:, 3:])]))
    g = np.zeros(6)
    g[:3] = [1.0, -2.0, 0.5]
    kb = krylov.build_krylov(A, g, 7)
    Q = kb.ortho
    R = resolvent_direct(A, 5.0).value
    vec = R @ g
    dense = A.to_dense()
    for k in range(4):
        resid = np.linalg.norm(vec - Q @ (Q.conj().T @ vec)) / np.linalg.norm(vec)
        assert resid <= 1e-8
        vec = dense @ vec


def test_shifted_power_keeps_polynomial_provenance():
    A = diagonal([0.5, 0.25])
    rp = resolvent_laurent(A, 2.0, 2)
    ap = ApproxOperator(
        A=A, value=rp.value, provenance=rp.provenance, error_bound=rp.error_bound
    )
    shifted = apply_shifted_power(ap, 0.1, 2)
    assert formal_degree(shifted.provenance) == 4
    coeffs = extract_polynomial(shifted)
    dense = A.to_dense()
    horner = coeffs[0] * np.eye(2)
    power = np.eye(2)
    for c in coeffs[1:]:
        power = power @ dense
        horner = horner + c * power
    assert inf_norm(horner - shifted.value) <= 1e-9 * (1.0 + inf_norm(shifted.value))
