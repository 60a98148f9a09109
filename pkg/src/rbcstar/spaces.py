"""Ambient C*-algebras: full matrix algebras, block-diagonal direct sums and
spans of generators, all realized inside some M_n.

Every space exposes a linear ``basis`` (list of n x n matrices), used for
exhaustive certification, plus ``coordinates``/``distance`` helpers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import (
    DEFAULT_TOL,
    adjoint,
    as_matrix,
    frozen,
    matrix_unit,
    operator_norm,
    operator_norms,
    vec,
)
from .errors import DimensionMismatch, NotASubalgebra


class AlgebraSpace:
    """Common interface of the three space variants."""

    dim: int

    @property
    def basis(self) -> list[np.ndarray]:
        raise NotImplementedError

    @cached_property
    def _basis_matrix(self) -> np.ndarray:
        b = self.basis
        if not b:
            return np.zeros((self.dim * self.dim, 0), dtype=complex)
        return np.stack([vec(x) for x in b], axis=1)

    @cached_property
    def _pinv(self) -> np.ndarray:
        return np.linalg.pinv(self._basis_matrix)

    @property
    def size(self) -> int:
        return len(self.basis)

    def coordinates(self, a) -> np.ndarray:
        """Least-squares coordinates of ``a`` in ``basis``."""
        a = np.asarray(a, dtype=complex)
        return self._pinv @ vec(a)

    def orthogonal_projection(self, a) -> np.ndarray:
        """Frobenius-orthogonal projection of ``a`` (or a stack) onto the span."""
        a = np.asarray(a, dtype=complex)
        v = vec(a).reshape(-1, self.dim * self.dim)
        proj = (self._basis_matrix @ (self._pinv @ v.T)).T
        n = self.dim
        return np.swapaxes(proj.reshape(a.shape[:-2] + (n, n)), -1, -2)

    def distance(self, a) -> np.ndarray | float:
        """Operator norm of the part of ``a`` outside the space."""
        a = np.asarray(a, dtype=complex)
        r = operator_norms(a - self.orthogonal_projection(a))
        return float(r) if np.ndim(r) == 0 else r

    def check_element(self, a) -> np.ndarray:
        a = as_matrix(a, square=True)
        if a.shape[0] != self.dim:
            raise DimensionMismatch(f"element of size {a.shape[0]} in a space of dimension {self.dim}")
        return a

    def is_commutative(self, tol: float = DEFAULT_TOL) -> bool:
        b = self.basis
        return all(
            operator_norm(x @ y - y @ x) <= tol for i, x in enumerate(b) for y in b[i + 1 :]
        )


@dataclass(frozen=True, eq=False)
class FullAlgebra(AlgebraSpace):
    """M_n = B(C^n) with basis the matrix units E_ij in row-major order."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @cached_property
    def basis(self):
        n = self.dim
        return [matrix_unit(n, i, j) for i in range(n) for j in range(n)]

    def coordinates(self, a):
        return np.asarray(a, dtype=complex).reshape(-1)

    def orthogonal_projection(self, a):
        return np.asarray(a, dtype=complex)

    def distance(self, a):
        a = np.asarray(a)
        return 0.0 if a.ndim == 2 else np.zeros(a.shape[:-2])

    def describe(self):
        return {"kind": "full", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class DirectSumAlgebra(AlgebraSpace):
    """Block-diagonal direct sum of spaces, embedded in M_N, N = sum of dims.

    Operations are componentwise and the norm is the max of the part norms,
    which is exactly what block-diagonal embedding gives.
    """

    parts: tuple

    def __post_init__(self):
        parts = tuple(FullAlgebra(p) if isinstance(p, (int, np.integer)) else p for p in self.parts)
        if not parts:
            raise ValueError("direct sum needs at least one part")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)

    @property
    def offsets(self) -> list[int]:
        return list(np.cumsum([0] + [p.dim for p in self.parts])[:-1])

    def embed(self, k: int, x) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        o, m = self.offsets[k], self.parts[k].dim
        out[o : o + m, o : o + m] = x
        return out

    def component(self, k: int, a) -> np.ndarray:
        o, m = self.offsets[k], self.parts[k].dim
        return np.asarray(a)[..., o : o + m, o : o + m]

    @cached_property
    def part_slices(self) -> list[slice]:
        """Index ranges of each part's basis inside ``basis``."""
        out, start = [], 0
        for p in self.parts:
            out.append(slice(start, start + p.size))
            start += p.size
        return out

    @cached_property
    def basis(self):
        return [self.embed(k, x) for k, p in enumerate(self.parts) for x in p.basis]

    def orthogonal_projection(self, a):
        a = np.asarray(a, dtype=complex)
        out = np.zeros_like(a)
        for k, p in enumerate(self.parts):
            o, m = self.offsets[k], p.dim
            out[..., o : o + m, o : o + m] = p.orthogonal_projection(a[..., o : o + m, o : o + m])
        return out

    def describe(self):
        if all(isinstance(p, FullAlgebra) for p in self.parts):
            return {"kind": "direct_sum", "parts": [p.dim for p in self.parts]}
        return {"kind": "direct_sum", "parts": [p.describe() for p in self.parts]}


def diagonal_algebra(n: int) -> DirectSumAlgebra:
    """The commutative algebra C^n of diagonal n x n matrices."""
    return DirectSumAlgebra(tuple([1] * n))


@dataclass(frozen=True, eq=False)
class SpanAlgebra(AlgebraSpace):
    """Linear span of generators inside M_n, certified as a C*-subalgebra.

    The basis is the maximal linearly independent prefix-greedy subset of
    the generators.  Construction fails with :class:`NotASubalgebra` unless
    the span is closed under adjoints and products to within ``tol``.
    An empty generator list gives the zero subspace.
    """

    dim: int
    generators: tuple = field(default=())
    tol: float = DEFAULT_TOL
    certify: bool = True

    def __post_init__(self):
        gens = tuple(frozen(self.check_element(g)) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if self.certify:
            self.closure_residuals(raise_on_failure=True)

    @cached_property
    def basis(self):
        chosen, vecs = [], []
        for g in self.generators:
            v = vec(g)
            if vecs:
                q, _ = np.linalg.qr(np.stack(vecs, axis=1))
                resid = v - q @ (q.conj().T @ v)
            else:
                resid = v
            if np.linalg.norm(resid) > 1e-10 * max(np.linalg.norm(v), 1e-300):
                chosen.append(g)
                vecs.append(v)
        return chosen

    def closure_residuals(self, raise_on_failure: bool = False) -> dict:
        b = self.basis
        star = max((self.distance(adjoint(x)) for x in b), default=0.0)
        prod = 0.0
        if b:
            stack = np.stack(b)
            products = np.einsum("iab,jbc->ijac", stack, stack)
            prod = float(np.max(self.distance(products)))
        if raise_on_failure and (star > self.tol or prod > self.tol):
            raise NotASubalgebra(
                f"span is not a *-subalgebra: adjoint residual {star:.3e}, product residual {prod:.3e}"
            )
        return {"adjoint": float(star), "product": prod}

    def describe(self):
        from .serialization import matrix_to_json

        return {"kind": "span", "dim": self.dim, "generators": [matrix_to_json(g) for g in self.generators]}


def space_direct_sum(first: AlgebraSpace, second: AlgebraSpace) -> DirectSumAlgebra:
    return DirectSumAlgebra((first, second))
