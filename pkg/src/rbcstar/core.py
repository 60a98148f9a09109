"""Dense complex matrices with their C*-structure.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``.
Operators on a Hilbert space C^n are n x n arrays, vectors of C^n are
n x 1 arrays.  The operator norm is the largest singular value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotAProjection

DEFAULT_TOL = 1e-10


def as_matrix(a, square: bool = False) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.array(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def operator_norm(a) -> float:
    """Largest singular value of ``a`` (0 for empty matrices)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.shape[-1] == 1 or a.shape[-2] == 1:
        return float(np.linalg.norm(a))
    return float(np.linalg.svd(a, compute_uv=False)[0])


def operator_norms(stack: np.ndarray) -> np.ndarray:
    """Operator norms of a stack of matrices with shape (..., m, n)."""
    stack = np.asarray(stack)
    if stack.shape[-1] == 0 or stack.shape[-2] == 0:
        return np.zeros(stack.shape[:-2])
    return np.linalg.svd(stack, compute_uv=False)[..., 0]


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def matrix_unit(n: int, i: int, j: int, m: int | None = None) -> np.ndarray:
    e = np.zeros((n, n if m is None else m), dtype=complex)
    e[i, j] = 1.0
    return e


def matrix_units(n: int) -> list[np.ndarray]:
    """E_ij for 0 <= i, j < n in row-major (i, j) order."""
    return [matrix_unit(n, i, j) for i in range(n) for j in range(n)]


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization; works on stacks (..., n, n)."""
    a = np.asarray(a)
    return np.swapaxes(a, -1, -2).reshape(a.shape[:-2] + (-1,))


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v)
    return np.swapaxes(v.reshape(v.shape[:-1] + (n, n)), -1, -2)


def _canonical_range_basis(q: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis of the range of the projection ``q``.

    Columns come from pivoted QR, get their first significant coordinate
    made real positive, and are sorted by the index of that coordinate.
    Coordinate projections therefore yield standard basis vectors.
    """
    n = q.shape[0]
    if rank == 0:
        return np.zeros((n, 0), dtype=complex)
    qq, _, _ = scipy.linalg.qr(q, pivoting=True)
    cols = qq[:, :rank]
    lead = []
    for k in range(rank):
        c = cols[:, k]
        idx = int(np.argmax(np.abs(c) > 1e-12 * np.max(np.abs(c))))
        cols[:, k] = c * (abs(c[idx]) / c[idx])
        lead.append(idx)
    order = np.argsort(lead, kind="stable")
    return cols[:, order]


@dataclass(frozen=True, eq=False)
class Projection:
    """A certified orthogonal projection p = p^2 = p* on C^n.

    ``basis`` is the unitary whose first ``rank`` columns span pH and whose
    remaining columns span p⊥H; block coordinates are taken in it.
    """

    matrix: np.ndarray
    rank: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL

    @classmethod
    def from_matrix(cls, p, tol: float = DEFAULT_TOL) -> "Projection":
        p = as_matrix(p, square=True)
        idem = operator_norm(p @ p - p)
        herm = operator_norm(adjoint(p) - p)
        if idem > tol or herm > tol:
            raise NotAProjection(
                f"not an orthogonal projection: |p^2-p|={idem:.3e}, |p*-p|={herm:.3e}"
            )
        eig = np.linalg.eigvalsh((p + adjoint(p)) / 2)
        rank = int(np.sum(np.abs(eig - 1.0) <= max(tol, 1e-8)))
        n = p.shape[0]
        u1 = _canonical_range_basis(p, rank)
        u2 = _canonical_range_basis(np.eye(n) - p, n - rank)
        return cls(frozen(p), rank, frozen(np.hstack([u1, u2])), tol)

    @classmethod
    def coordinate(cls, dim: int, rank: int, tol: float = DEFAULT_TOL) -> "Projection":
        """diag(1, ..., 1, 0, ..., 0) with ``rank`` ones."""
        if not 0 <= rank <= dim:
            raise ValueError(f"rank {rank} out of range for dimension {dim}")
        p = np.diag([1.0] * rank + [0.0] * (dim - rank)).astype(complex)
        return cls(frozen(p), rank, frozen(np.eye(dim)), tol)

    @classmethod
    def onto(cls, vectors, tol: float = DEFAULT_TOL) -> "Projection":
        """Orthogonal projection onto the span of the given column vectors."""
        v = as_matrix(vectors)
        q, s, _ = np.linalg.svd(v, full_matrices=False)
        r = int(np.sum(s > 1e-10 * max(s[0], 1e-300)))
        q = q[:, :r]
        return cls.from_matrix(q @ adjoint(q), tol)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def corank(self) -> int:
        return self.dim - self.rank

    def complement(self) -> "Projection":
        n, r = self.dim, self.rank
        basis = np.hstack([self.basis[:, r:], self.basis[:, :r]])
        return Projection(frozen(np.eye(n) - self.matrix), n - r, frozen(basis), self.tol)

    def defects(self) -> tuple[float, float]:
        p = self.matrix
        return operator_norm(p @ p - p), operator_norm(adjoint(p) - p)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """The four compressions of a matrix relative to a projection p.

    Shapes are (r, r), (r, s), (s, r), (s, s) with r = rank p, s = n - r,
    expressed in the coordinates of ``basis``.
    """

    a11: np.ndarray
    a12: np.ndarray
    a21: np.ndarray
    a22: np.ndarray
    basis: np.ndarray

    @property
    def blocks(self):
        return self.a11, self.a12, self.a21, self.a22


def _check_same_dim(a: np.ndarray, p: Projection):
    if a.shape != (p.dim, p.dim):
        raise DimensionMismatch(f"matrix shape {a.shape} vs projection dimension {p.dim}")


def compress(a, p: Projection) -> BlockDecomposition:
    a = as_matrix(a, square=True)
    _check_same_dim(a, p)
    u, r = p.basis, p.rank
    b = adjoint(u) @ a @ u
    return BlockDecomposition(
        frozen(b[:r, :r]), frozen(b[:r, r:]), frozen(b[r:, :r]), frozen(b[r:, r:]), u
    )


def to_block_coordinates(a: np.ndarray, p: Projection) -> np.ndarray:
    """u* a u for the adapted unitary u of p; accepts stacks."""
    u = p.basis
    return adjoint(u) @ a @ u


def from_block_coordinates(b: np.ndarray, p: Projection) -> np.ndarray:
    u = p.basis
    return u @ b @ adjoint(u)


def assemble(d: BlockDecomposition, p: Projection) -> np.ndarray:
    """Inverse of :func:`compress`."""
    r, s = p.rank, p.corank
    shapes = [(r, r), (r, s), (s, r), (s, s)]
    for blk, shape in zip(d.blocks, shapes):
        if np.shape(blk) != shape:
            raise DimensionMismatch(f"block shape {np.shape(blk)} expected {shape}")
    b = np.zeros((p.dim, p.dim), dtype=complex)
    b[:r, :r], b[:r, r:], b[r:, :r], b[r:, r:] = d.blocks
    return from_block_coordinates(b, p)


def direct_sum_embed(parts) -> np.ndarray:
    """Block-diagonal matrix with the given square parts."""
    parts = [as_matrix(x, square=True) for x in parts]
    if not parts:
        raise ValueError("direct_sum_embed needs at least one part")
    return scipy.linalg.block_diag(*parts).astype(complex)


def cstar_words(d, max_len: int) -> list[np.ndarray]:
    """All products of d and d* of length 1..max_len.

    Length-major, then lexicographic with d before d*.
    """
    d = as_matrix(d, square=True)
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    return [w for w, _ in cstar_words_with_letters(d, max_len)]


def cstar_words_with_letters(d, max_len: int):
    """Like :func:`cstar_words` but yields (word, letters) with letters a
    tuple over {0: d, 1: d*}."""
    d = as_matrix(d, square=True)
    letters = (d, adjoint(d))
    out = []
    for k in range(1, max_len + 1):
        for combo in itertools.product((0, 1), repeat=k):
            w = letters[combo[0]]
            for c in combo[1:]:
                w = w @ letters[c]
            out.append((w, combo))
    return out
