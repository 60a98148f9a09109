import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cgauss, coord, opnorm, seeds, units, worst_rb_residual
from rbcstar.constructions import (
    block_diagonal_space,
    certify_decomposition,
    certify_real_rb,
    decompose_from_rb,
    direct_sum_rb,
    left_mult_projection,
    phi_restrict,
    principal_angles,
    projection_rb_from_decomposition,
    psi_extend,
    real_restrict,
    real_summation,
    sample,
    self_adjoint_basis,
    symmetric_from_real,
    triangular_rb,
    volterra_discrete,
    volterra_operator,
    volterra_probe_residual,
)
from rbcstar.core import Projection, from_block_coordinates, to_block_coordinates
from rbcstar.errors import (
    CertificationFailed,
    DimensionMismatch,
    NonRealWeight,
    NotCommutative,
    NotDirectSum,
    NotMatching,
    NotSubalgebra,
    NotSymmetric,
    WeightMismatch,
)
from rbcstar.families import lower_block_injection, random_rb_weight_minus_one, random_real_rb, random_triangular
from rbcstar.rota_baxter import certify_rb, idempotency_defect, matching_matrix_criterion, symmetry_defect
from rbcstar.sampling import random_projection
from rbcstar.spaces import DirectSumAlgebra, FullAlgebra, diagonal_algebra
from rbcstar.superop import identity, image_discrepancy, left_mult, right_mult, zero


def rb(op, w=-1, space=None):
    return certify_rb(op, w, space)


# --- left multiplication / triangular / direct sums ---------------------------


def test_left_mult_projection_examples():
    assert np.array_equal(left_mult_projection(Projection.coordinate(2, 0)).op.action, np.zeros((4, 4)))
    assert np.allclose(left_mult_projection(Projection.coordinate(2, 2)).op.action, np.eye(4))
    R = left_mult_projection(Projection.coordinate(2, 1))
    assert R.certificate.max_residual <= 1e-13
    p = coord(2, 1)
    assert worst_rb_residual(lambda a: p @ a, -1, units(2)) <= 1e-13


def test_triangular_examples():
    p = Projection.coordinate(2, 1)
    one, zero1 = rb(identity(1)), rb(zero(1))
    T = triangular_rb(one, zero1, p)
    assert image_discrepancy(T.op, left_mult(p)) <= 1e-15
    T = triangular_rb(zero1, one, p)
    assert image_discrepancy(T.op, right_mult(p.complement())) <= 1e-15
    T = triangular_rb(zero1, zero1, p)
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(T.apply(a), [[0, 2], [0, 0]]) and T.certificate.passed


def test_triangular_rejects_wrong_inputs():
    p = Projection.coordinate(3, 1)
    with pytest.raises(WeightMismatch):
        triangular_rb(rb(zero(1), 0), rb(zero(2)), p)
    with pytest.raises(DimensionMismatch):
        triangular_rb(rb(zero(2)), rb(zero(2)), p)


@settings(max_examples=20)
@given(seeds, st.integers(2, 5))
def test_triangular_block_pattern(seed, n):
    rng = np.random.default_rng(seed)
    R, p, P1, P2 = random_triangular(rng, n)
    a = cgauss(rng, n, n)
    b = to_block_coordinates(a, p)
    r = p.rank
    out = to_block_coordinates(R.apply(a), p)
    assert np.allclose(out[:r, :r], P1.apply(b[:r, :r]))
    assert np.allclose(out[r:, r:], P2.apply(b[r:, r:]))
    assert np.allclose(out[:r, r:], b[:r, r:])
    assert np.allclose(out[r:, :r], 0)


def test_direct_sum_examples():
    Z = direct_sum_rb(rb(zero(1)), rb(zero(2)))
    assert np.array_equal(Z.op.action, np.zeros((9, 9)))
    I = direct_sum_rb(rb(identity(2)), rb(identity(1)))
    assert I.certificate.passed and image_discrepancy(I.op, identity(3), I.space.basis) == 0
    q1, q2 = Projection.coordinate(2, 1), Projection.coordinate(2, 2)
    D = direct_sum_rb(rb(left_mult(q1)), rb(left_mult(q2)))
    big = left_mult(Projection.from_matrix(np.diag([1, 0, 1, 1])))
    assert image_discrepancy(D.op, big, D.space.basis) <= 1e-15
    with pytest.raises(WeightMismatch):
        direct_sum_rb(rb(zero(1), 0), rb(zero(1), -1))


# --- matching correspondence ------------------------------------------------


def test_phi_of_left_mult_is_id_plus_zero():
    p = Projection.coordinate(3, 1)
    Q = phi_restrict(left_mult_projection(p), p)
    want = direct_sum_rb(rb(identity(1)), rb(zero(2)))
    assert image_discrepancy(Q.op, want.op, Q.space.basis) <= 1e-15


@settings(max_examples=15)
@given(seeds, st.integers(2, 5))
def test_phi_of_triangular_is_direct_sum(seed, n):
    rng = np.random.default_rng(seed)
    R, p, P1, P2 = random_triangular(rng, n)
    Q = phi_restrict(R, p)
    assert image_discrepancy(Q.op, direct_sum_rb(P1, P2).op, block_diagonal_space(p).basis) <= 1e-12


@settings(max_examples=15)
@given(seeds, st.integers(2, 5))
def test_phi_rejects_perturbed(seed, n):
    rng = np.random.default_rng(seed)
    R, p, _, _ = random_triangular(rng, n)
    bad = certify_rb(lower_block_injection(rng, R.op, p), -1, raise_on_failure=False)
    with pytest.raises(NotMatching) as info:
        phi_restrict(bad, p)
    assert info.value.witness is not None


def test_phi_rejects_right_mult():
    p = Projection.coordinate(2, 1)
    with pytest.raises(NotMatching):
        phi_restrict(rb(right_mult(p)), p)


def test_psi_examples():
    p = Projection.coordinate(3, 2)
    space = block_diagonal_space(p)
    P = psi_extend(certify_rb(zero(3), -1, space), p)
    a = cgauss(np.random.default_rng(0), 3, 3)
    upper = np.zeros_like(a)
    upper[:2, 2:] = a[:2, 2:]
    assert np.allclose(P.apply(a), upper)
    assert matching_matrix_criterion(P.op, p, units(3)).ok
    P = psi_extend(certify_rb(identity(3), -1, space), p)
    lower = np.zeros_like(a)
    lower[2:, :2] = a[2:, :2]
    assert np.allclose(P.apply(a), a - lower)


def test_psi_checks_block_sizes():
    p = Projection.coordinate(3, 2)
    with pytest.raises(DimensionMismatch):
        psi_extend(certify_rb(zero(3), -1, DirectSumAlgebra((1, 2))), p)


@settings(max_examples=15)
@given(seeds, st.integers(2, 5))
def test_round_trips(seed, n):
    rng = np.random.default_rng(seed)
    R, p, _, _ = random_triangular(rng, n)
    assert image_discrepancy(psi_extend(phi_restrict(R, p), p).op, R.op) <= 1e-12
    r = p.rank
    Pp = direct_sum_rb(random_rb_weight_minus_one(rng, r), random_rb_weight_minus_one(rng, n - r))
    back = phi_restrict(psi_extend(Pp, p), p)
    assert image_discrepancy(back.op, Pp.op, block_diagonal_space(p).basis) <= 1e-12


# --- symmetric <-> real ------------------------------------------------------


def test_self_adjoint_basis_of_diagonal_algebra():
    sa = self_adjoint_basis(diagonal_algebra(3))
    assert len(sa) == 3
    assert all(np.allclose(s, s.conj().T) for s in sa)


def test_real_restrict_examples():
    s = diagonal_algebra(2)
    assert np.allclose(real_restrict(certify_rb(identity(2), -1, s)).matrix, np.eye(2))
    assert np.allclose(real_restrict(certify_rb(zero(2), -1, s)).matrix, 0)
    V = volterra_discrete(6)
    real = real_restrict(V)
    assert real.weight == pytest.approx(1 / 6)
    assert np.allclose(real.matrix, real_summation(6).matrix, atol=1e-14)


def test_real_restrict_errors():
    with pytest.raises(NotCommutative):
        real_restrict(certify_rb(identity(2), -1, FullAlgebra(2)))
    with pytest.raises(NonRealWeight):
        real_restrict(certify_rb(zero(2), 1j, diagonal_algebra(2)))
    skew = certify_rb(identity(2) * 1j, -1j, diagonal_algebra(2), raise_on_failure=False)
    with pytest.raises((NotSymmetric, NonRealWeight)):
        real_restrict(skew)


def test_symmetric_from_real_examples():
    s = diagonal_algebra(3)
    sa = self_adjoint_basis(s)
    P = symmetric_from_real(certify_real_rb(s, sa, np.eye(3), -1))
    assert image_discrepancy(P.op, identity(3), s.basis) <= 1e-15
    P = symmetric_from_real(certify_real_rb(s, sa, np.zeros((3, 3)), 0.5))
    assert image_discrepancy(P.op, zero(3), s.basis) == 0
    P = symmetric_from_real(real_summation(8))
    assert image_discrepancy(P.op, volterra_operator(8), diagonal_algebra(8).basis) <= 1e-13


def test_symmetric_from_real_noncommutative_escape_hatch():
    s = FullAlgebra(2)
    sa = self_adjoint_basis(s)
    P1 = certify_real_rb(s, sa, np.eye(len(sa)), -1, raise_on_failure=False)
    with pytest.raises(NotCommutative):
        symmetric_from_real(P1)
    bare = symmetric_from_real(P1, allow_noncommutative=True)
    a = cgauss(np.random.default_rng(1), 2, 2)
    assert np.allclose(bare.apply(a), a)


@settings(max_examples=15)
@given(seeds)
def test_real_round_trips(seed):
    P1 = random_real_rb(np.random.default_rng(seed), 6)
    R = symmetric_from_real(P1)
    assert symmetry_defect(R.op, R.space.basis) <= 1e-13
    assert np.max(np.abs(real_restrict(R).matrix - P1.matrix)) <= 1e-12


def test_certify_real_rb_failure():
    s = diagonal_algebra(2)
    with pytest.raises(CertificationFailed):
        certify_real_rb(s, self_adjoint_basis(s), np.eye(2), 0.0)


# --- decompositions ------------------------------------------------------------


def test_projection_from_coordinate_decomposition():
    e = units(4)
    a1, a2 = [e[0], e[5]], [e[10], e[15]]
    R = projection_rb_from_decomposition(certify_decomposition(a1, a2, 4))
    want = left_mult(Projection.coordinate(4, 2))
    assert image_discrepancy(R.op, want, diagonal_algebra(4).basis) <= 1e-13
    assert R.notes["norm_witness"] <= 1 + 1e-8
    assert R.notes["idempotency_defect"] <= 1e-13 and R.notes["symmetry_defect"] <= 1e-13
    back = decompose_from_rb(R)
    assert np.max(principal_angles(back.a1_basis, a1)) <= 1e-10
    assert np.max(principal_angles(back.a2_basis, a2)) <= 1e-10


def test_trivial_decompositions():
    basis = diagonal_algebra(3).basis
    R = projection_rb_from_decomposition(certify_decomposition(basis, [], 3))
    assert image_discrepancy(R.op, identity(3), basis) <= 1e-13
    R = projection_rb_from_decomposition(certify_decomposition([], basis, 3))
    assert image_discrepancy(R.op, zero(3), basis) <= 1e-13


def test_decompose_identity_and_zero():
    s = diagonal_algebra(3)
    d = decompose_from_rb(certify_rb(identity(3), -1, s))
    assert len(d.a1_basis) == 3 and len(d.a2_basis) == 0
    d = decompose_from_rb(certify_rb(zero(3), -1, s))
    assert len(d.a1_basis) == 0 and len(d.a2_basis) == 3


def test_decomposition_errors():
    e = units(2)
    with pytest.raises(NotDirectSum):
        certify_decomposition([e[0]], [e[0]], 2)
    with pytest.raises(NotSubalgebra):
        certify_decomposition([e[1]], [], 2)


def test_decompose_rejects_non_idempotent_or_non_symmetric():
    from rbcstar.errors import NotIdempotent

    with pytest.raises(NotIdempotent):
        # c P is Rota-Baxter of weight c lambda, so -M Q has weight -1
        decompose_from_rb(certify_rb(volterra_operator(3) * -3, -1, diagonal_algebra(3)))
    with pytest.raises(NotSymmetric):
        decompose_from_rb(rb(left_mult(Projection.coordinate(2, 1))))


def test_principal_angles_detect_difference():
    e = units(2)
    assert principal_angles([e[0]], [e[3]])[0] == pytest.approx(np.pi / 2)


def test_decomposition_with_random_projection_is_contractive():
    rng = np.random.default_rng(11)
    p = random_projection(rng, 3, 1)
    q = np.eye(3) - p.matrix
    # A1 = C p, A2 = C q inside the commutative algebra they generate
    R = projection_rb_from_decomposition(certify_decomposition([p.matrix], [q], 3))
    assert R.notes["norm_witness"] <= 1 + 1e-8


# --- Volterra ---------------------------------------------------------------------


def test_volterra_small_cases():
    V1 = volterra_discrete(1)
    assert np.array_equal(V1.op.action, np.zeros((1, 1)))
    assert certify_rb(V1.op, 3 - 1j, diagonal_algebra(1)).certificate.passed
    for m in (4, 8, 16, 32):
        assert volterra_discrete(m).certificate.max_residual <= 1e-13


def test_volterra_matches_strict_cumulative_sum():
    m = 7
    x = np.random.default_rng(0).standard_normal(m)
    got = np.diag(volterra_operator(m).apply(np.diag(x)))
    want = np.concatenate([[0.0], np.cumsum(x)[:-1]]) / m
    assert np.allclose(got, want)


def test_volterra_constant_probe_and_ratio():
    one = lambda x: np.ones_like(x)  # noqa: E731
    assert volterra_probe_residual(64, 1 / 64, one, one) <= 1e-14
    r = volterra_probe_residual(128, 0) / volterra_probe_residual(64, 0)
    assert 0.4 <= r <= 0.6


def test_volterra_probe_agrees_with_dense_residual():
    from rbcstar.rota_baxter import rb_residual

    m = 8
    a, b = sample(lambda x: x, m), sample(lambda x: x**2, m)
    dense = rb_residual(volterra_operator(m), 0, a, b)
    assert volterra_probe_residual(m, 0) == pytest.approx(dense, rel=1e-12)


def test_volterra_rejects_bad_sizes():
    with pytest.raises(ValueError):
        volterra_discrete(0)
