import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cgauss, coord, opnorm, random_proj_matrix, seeds, sizes
from rbcstar.core import (
    Projection,
    adjoint,
    as_matrix,
    assemble,
    BlockDecomposition,
    compress,
    cstar_words,
    direct_sum_embed,
    operator_norm,
    operator_norms,
    unvec,
    vec,
)
from rbcstar.errors import DimensionMismatch, NotAProjection


def test_adjoint_examples():
    assert np.array_equal(adjoint(np.eye(2)), np.eye(2))
    assert np.array_equal(adjoint(np.array([[0, 1], [0, 0]])), np.array([[0, 0], [1, 0]]))


@given(seeds, sizes)
def test_adjoint_is_involution(seed, n):
    a = cgauss(np.random.default_rng(seed), n, n)
    assert np.array_equal(adjoint(adjoint(a)), a)


def test_operator_norm_examples():
    assert operator_norm(np.eye(3)) == pytest.approx(1.0)
    assert operator_norm(np.diag([3, -4])) == pytest.approx(4.0)
    assert operator_norm(np.array([[0, 2], [0, 0]])) == pytest.approx(2.0)


@settings(max_examples=40)
@given(seeds, sizes)
def test_operator_norm_matches_eigen_oracle(seed, n):
    a = cgauss(np.random.default_rng(seed), n, n)
    assert operator_norm(a) == pytest.approx(opnorm(a), rel=1e-12)


@given(seeds, sizes)
def test_cstar_identity(seed, n):
    # |a* a| = |a|^2
    a = cgauss(np.random.default_rng(seed), n, n)
    assert operator_norm(adjoint(a) @ a) == pytest.approx(operator_norm(a) ** 2, rel=1e-10)


def test_operator_norms_batched():
    rng = np.random.default_rng(0)
    stack = cgauss(rng, 3, 2, 4, 4)
    got = operator_norms(stack)
    assert got.shape == (3, 2)
    assert np.allclose(got, [[opnorm(x) for x in row] for row in stack])


def test_as_matrix_rejects_bad_input():
    with pytest.raises(DimensionMismatch):
        as_matrix(np.ones((2, 3)), square=True)
    with pytest.raises(ValueError):
        as_matrix(np.array([[np.nan]]))


@given(seeds, sizes, sizes)
def test_vec_kronecker_identity(seed, n, _):
    # vec(x a y) = (y^T kron x) vec(a), column stacking
    rng = np.random.default_rng(seed)
    x, a, y = (cgauss(rng, n, n) for _ in range(3))
    assert np.allclose(vec(x @ a @ y), np.kron(y.T, x) @ vec(a))
    assert np.array_equal(vec(a), a.T.reshape(-1))
    assert np.array_equal(unvec(vec(a), n), a)


def test_projection_validation():
    with pytest.raises(NotAProjection):
        Projection.from_matrix(np.array([[1, 1], [0, 0]]))
    with pytest.raises(NotAProjection):
        Projection.from_matrix(2 * np.eye(2))
    p = Projection.from_matrix(coord(3, 2))
    assert (p.rank, p.corank, p.dim) == (2, 1, 3)
    assert np.allclose(p.complement().matrix, np.diag([0, 0, 1]))


@given(seeds, st.integers(2, 5))
def test_random_projection_basis_is_adapted(seed, n):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(0, n + 1))
    pm = random_proj_matrix(rng, n, r)
    p = Projection.from_matrix(pm)
    u = p.basis
    assert p.rank == r
    assert np.allclose(u.conj().T @ u, np.eye(n), atol=1e-12)
    assert np.allclose(u.conj().T @ pm @ u, coord(n, r), atol=1e-12)


def test_compress_coordinate_example():
    d = compress(np.array([[1, 2], [3, 4]]), Projection.coordinate(2, 1))
    assert [x.item() for x in d.blocks] == [1, 2, 3, 4]


def test_compress_full_projection():
    a = np.arange(9.0).reshape(3, 3)
    d = compress(a, Projection.coordinate(3, 3))
    assert np.allclose(d.a11, a)
    assert d.a12.size == d.a21.size == d.a22.size == 0


@settings(max_examples=40)
@given(seeds, st.integers(1, 5))
def test_compress_assemble_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    p = Projection.from_matrix(random_proj_matrix(rng, n, int(rng.integers(0, n + 1))))
    a = cgauss(rng, n, n)
    assert operator_norm(assemble(compress(a, p), p) - a) <= 1e-12 * max(1, opnorm(a))
    # blocks are the compressions p a p etc. expressed in the adapted basis
    d = compress(a, p)
    pm, q = p.matrix, np.eye(n) - p.matrix
    assert opnorm(d.a12) == pytest.approx(opnorm(pm @ a @ q), abs=1e-12)
    assert opnorm(d.a21) == pytest.approx(opnorm(q @ a @ pm), abs=1e-12)


def test_assemble_examples():
    p = Projection.coordinate(3, 2)
    z = BlockDecomposition(np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((1, 1)), p.basis)
    assert np.array_equal(assemble(z, p), np.zeros((3, 3)))
    ident = BlockDecomposition(np.eye(2), np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((1, 1)), p.basis)
    assert np.allclose(assemble(ident, p), p.matrix)
    with pytest.raises(DimensionMismatch):
        assemble(BlockDecomposition(np.eye(1), np.zeros((1, 2)), np.zeros((2, 1)), np.zeros((2, 2)), p.basis), p)


def test_direct_sum_embed_examples():
    e = direct_sum_embed([np.array([[2]]), np.array([[-5]])])
    assert np.array_equal(e, np.diag([2, -5]))
    assert operator_norm(e) == pytest.approx(5)
    assert np.array_equal(direct_sum_embed([np.eye(2), np.eye(3)]), np.eye(5))


@given(seeds, sizes, sizes)
def test_direct_sum_norm_is_max(seed, n1, n2):
    rng = np.random.default_rng(seed)
    a1, a2 = cgauss(rng, n1, n1), cgauss(rng, n2, n2)
    assert operator_norm(direct_sum_embed([a1, a2])) == pytest.approx(max(opnorm(a1), opnorm(a2)), rel=1e-12)


def test_cstar_words_enumeration():
    d = np.array([[0, 1], [2, 0]], dtype=complex)
    ds = d.conj().T
    assert [w.tolist() for w in cstar_words(d, 1)] == [d.tolist(), ds.tolist()]
    two = cstar_words(d, 2)
    expected = [d, ds, d @ d, d @ ds, ds @ d, ds @ ds]
    assert len(two) == 6
    assert all(np.array_equal(a, b) for a, b in zip(two, expected))
    assert len(cstar_words(d, 4)) == 2 + 4 + 8 + 16
    h = d + ds
    w = cstar_words(h, 2)
    assert np.array_equal(w[0], w[1]) and np.array_equal(w[2], w[5])
    with pytest.raises(ValueError):
        cstar_words(d, 0)
