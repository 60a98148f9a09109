import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cgauss, coord, opnorm, random_proj_matrix, rb_lhs_minus_rhs, seeds, units, worst_rb_residual
from rbcstar.core import Projection
from rbcstar.errors import CertificationFailed, DimensionMismatch
from rbcstar.families import random_rb_weight_minus_one, random_triangular
from rbcstar.rota_baxter import (
    certify_rb,
    idempotency_defect,
    matching_defect,
    matching_matrix_criterion,
    matching_sweep,
    rb_residual,
    rb_residual_grid,
    symmetry_defect,
    symmetry_defects,
    tilde,
)
from rbcstar.spaces import FullAlgebra, diagonal_algebra
from rbcstar.superop import SuperOperator, from_structure, DiscreteVolterra, identity, left_mult, right_mult, zero


def test_rb_residual_examples():
    rng = np.random.default_rng(0)
    a, b = cgauss(rng, 2, 2), cgauss(rng, 2, 2)
    assert rb_residual(zero(2), 3 - 1j, a, b) == 0
    assert rb_residual(identity(2), -1, a, b) <= 1e-12
    assert rb_residual(identity(2), 0, np.eye(2), np.eye(2)) == pytest.approx(1.0)


@settings(max_examples=30)
@given(seeds, st.integers(1, 3))
def test_rb_residual_matches_callable_oracle(seed, n):
    rng = np.random.default_rng(seed)
    A = cgauss(rng, n * n, n * n)
    T = SuperOperator(n, A)

    def P(x):  # independent evaluation of the same linear map
        return (A @ x.T.reshape(-1)).reshape(n, n).T

    lam = complex(*rng.standard_normal(2))
    a, b = cgauss(rng, n, n), cgauss(rng, n, n)
    want = opnorm(rb_lhs_minus_rhs(P, lam, a, b))
    assert rb_residual(T, lam, a, b) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_residual_grid_agrees_with_pairwise():
    rng = np.random.default_rng(1)
    T = SuperOperator(2, cgauss(rng, 4, 4))
    basis = units(2)
    grid = rb_residual_grid(T, 0.5, basis, basis)
    assert np.allclose(grid, [[rb_residual(T, 0.5, a, b) for b in basis] for a in basis])


def test_certify_left_mult_example():
    R = certify_rb(left_mult(Projection.coordinate(2, 1)), -1, FullAlgebra(2))
    c = R.certificate
    assert c.passed and c.max_residual <= 1e-13 and c.pairs_checked == 16
    # oracle: direct products p a, p b per pair
    p = coord(2, 1)
    assert worst_rb_residual(lambda x: p @ x, -1, units(2)) <= 1e-13


def test_certify_identity_weight_zero_fails_at_e11():
    with pytest.raises(CertificationFailed) as info:
        certify_rb(identity(2), 0, FullAlgebra(2))
    assert info.value.witness == (0, 0)
    assert info.value.residual == pytest.approx(1.0)


def test_zero_certifies_at_any_weight():
    assert certify_rb(zero(3), 7 + 2j, FullAlgebra(3)).certificate.passed


def test_random_mode_is_seeded_and_reports_trials():
    R1 = certify_rb(identity(2), 0, FullAlgebra(2), mode="random", trials=20, seed=5, raise_on_failure=False)
    R2 = certify_rb(identity(2), 0, FullAlgebra(2), mode="random", trials=20, seed=5, raise_on_failure=False)
    assert R1.certificate == R2.certificate
    assert not R1.certificate.passed and R1.certificate.trials == 20
    ok = certify_rb(left_mult(Projection.coordinate(3, 1)), -1, mode="random", trials=30)
    assert ok.certificate.passed and ok.certificate.probe_mode == "random"
    with pytest.raises(ValueError):
        certify_rb(identity(2), -1, mode="sideways")


def test_invariance_is_part_of_certification():
    # id - P, with P a non-diagonal map, is RB on M_2 but leaves the diagonal algebra
    L = left_mult(Projection.from_matrix(np.full((2, 2), 0.5)))
    R = certify_rb(L, -1, diagonal_algebra(2), raise_on_failure=False)
    assert R.certificate.invariance_residual > 0.1 and not R.certificate.passed


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        certify_rb(identity(2), -1, FullAlgebra(3))


@settings(max_examples=25)
@given(seeds, st.integers(1, 4))
def test_exhaustive_certificate_extends_to_random_elements(seed, n):
    # bilinearity: a basis certificate controls the residual on the span
    rng = np.random.default_rng(seed)
    R = random_rb_weight_minus_one(rng, n)
    a, b = cgauss(rng, n, n), cgauss(rng, n, n)
    assert rb_residual(R.op, -1, a, b) <= 1e-10 * max(1.0, opnorm(a) * opnorm(b))


def test_tilde_examples():
    Z = certify_rb(zero(2), 0, FullAlgebra(2))
    assert np.array_equal(tilde(Z).op.action, np.zeros((4, 4)))
    p = Projection.coordinate(3, 1)
    T = tilde(certify_rb(left_mult(p), -1))
    a = cgauss(np.random.default_rng(2), 3, 3)
    assert np.allclose(T.apply(a), (np.eye(3) - p.matrix) @ a)


@settings(max_examples=20)
@given(seeds, st.integers(1, 4))
def test_tilde_is_an_involution_and_recertifies(seed, n):
    R = random_rb_weight_minus_one(np.random.default_rng(seed), n)
    T = tilde(R)
    assert T.certificate.passed
    assert np.max(np.abs(tilde(T).op.action - R.op.action)) <= 1e-14


def test_symmetry_defect_examples():
    probes = units(2)
    assert symmetry_defect(identity(2), probes) == 0
    e12 = units(2)[1]
    assert symmetry_defect(left_mult(Projection.coordinate(2, 1)), [e12]) == pytest.approx(1.0)
    V = from_structure(6, DiscreteVolterra(6))
    real = [np.diag(np.random.default_rng(3).standard_normal(6)).astype(complex)]
    assert symmetry_defect(V, diagonal_algebra(6).basis + real) == 0
    assert symmetry_defects(identity(2), []) == []


def test_matching_defect_examples():
    p = coord(2, 1)
    L = left_mult(Projection.coordinate(2, 1))
    rng = np.random.default_rng(4)
    for a in units(2):
        for x in np.eye(2):
            assert matching_defect(L, -1, p, a, x) == 0
    a, x = cgauss(rng, 2, 2), cgauss(rng, 2)
    assert matching_defect(L, -1, np.zeros((2, 2)), a, x) == 0
    assert matching_defect(identity(2), -1, np.eye(2), a, x) <= 1e-12
    with pytest.raises(DimensionMismatch):
        matching_defect(L, -1, p, a, np.ones(3))


def test_matching_sweep_locates_worst_pair():
    p = coord(2, 1)
    sw = matching_sweep(right_mult(Projection.coordinate(2, 1)), -1, p, units(2))
    assert sw.max_defect > 0.5 and not sw.ok()
    i, k = sw.witness
    a = units(2)[i]
    x = np.eye(2)[k]
    assert matching_defect(right_mult(Projection.coordinate(2, 1)), -1, p, a, x) == pytest.approx(sw.max_defect)


def test_matching_criterion_examples():
    p = Projection.coordinate(2, 1)
    assert matching_matrix_criterion(left_mult(p), p, units(2)).ok
    bad = matching_matrix_criterion(right_mult(p), p, units(2))
    assert not bad.ok
    assert np.array_equal(units(2)[bad.witness], units(2)[1])  # E_12


@settings(max_examples=25)
@given(seeds, st.integers(2, 5))
def test_triangular_operators_pass_the_criterion(seed, n):
    R, p, _, _ = random_triangular(np.random.default_rng(seed), n)
    crit = matching_matrix_criterion(R.op, p, units(n))
    assert crit.ok
    assert matching_sweep(R.op, -1, p.matrix, units(n)).max_defect <= 1e-10


def test_idempotency_defect_examples():
    assert idempotency_defect(identity(3)) == 0
    rng = np.random.default_rng(5)
    p = Projection.from_matrix(random_proj_matrix(rng, 3, 2))
    assert idempotency_defect(left_mult(p)) <= 1e-12
    assert idempotency_defect(identity(2) * 2) == pytest.approx(2.0)
