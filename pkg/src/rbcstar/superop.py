"""Linear maps on M_n stored as dense n^2 x n^2 matrices over column-stacked
vectorizations, optionally carrying a structural tag describing the formula
they were built from.

Conventions: vec(x a y) = (y^T kron x) vec(a), so left multiplication by m
acts as I kron m and right multiplication by m as m^T kron I.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.optimize

from .core import (
    BlockDecomposition,
    Projection,
    adjoint,
    as_matrix,
    assemble,
    compress,
    frozen,
    operator_norm,
    operator_norms,
    unvec,
    vec,
)
from .errors import DimensionMismatch, NotInvertible

INVERSION_COND_LIMIT = 1e12


# --- structure tags -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LeftMult:
    p: np.ndarray
    stackable = True

    def evaluate(self, a):
        return self.p @ a


@dataclass(frozen=True, eq=False)
class RightMult:
    q: np.ndarray
    stackable = True

    def evaluate(self, a):
        return a @ self.q


@dataclass(frozen=True, eq=False)
class Sandwich:
    """a -> sum_k x_k a y_k."""

    terms: tuple
    stackable = True

    def evaluate(self, a):
        return sum(x @ a @ y for x, y in self.terms)


@dataclass(frozen=True, eq=False)
class Triangular:
    """Blocks (a11, a12, a21, a22) -> (P1(a11), a12, 0, P2(a22)) relative to p."""

    p1: "SuperOperator"
    p2: "SuperOperator"
    p: Projection

    def evaluate(self, a):
        d = compress(a, self.p)
        out = BlockDecomposition(
            self.p1.apply(d.a11) if self.p.rank else d.a11,
            d.a12,
            np.zeros_like(d.a21),
            self.p2.apply(d.a22) if self.p.corank else d.a22,
            d.basis,
        )
        return assemble(out, self.p)


@dataclass(frozen=True, eq=False)
class DirectSumOp:
    """Componentwise action on the diagonal blocks of sizes ``dims``."""

    parts: tuple
    dims: tuple

    def evaluate(self, a):
        out = np.zeros_like(a, dtype=complex)
        o = 0
        for op, m in zip(self.parts, self.dims):
            out[o : o + m, o : o + m] = op.apply(a[o : o + m, o : o + m])
            o += m
        return out


@dataclass(frozen=True, eq=False)
class ProjectionOntoSummand:
    """Projection onto span(a1) along span(a2), preceded by the Frobenius
    projection onto span(a1 + a2)."""

    a1: tuple
    a2: tuple

    def evaluate(self, a):
        basis = list(self.a1) + list(self.a2)
        if not basis:
            return np.zeros_like(a, dtype=complex)
        B = np.stack([vec(x) for x in basis], axis=1)
        c = np.linalg.lstsq(B, vec(a), rcond=None)[0]
        k = len(self.a1)
        return unvec(B[:, :k] @ c[:k], a.shape[0])


@dataclass(frozen=True, eq=False)
class DiscreteVolterra:
    """Left-endpoint strict summation h * sum_{j<k} f_j on the diagonal, h = 1/M."""

    samples: int
    stackable = True

    def evaluate(self, a):
        f = np.diagonal(a, axis1=-2, axis2=-1)
        h = 1.0 / self.samples
        q = h * (np.cumsum(f, axis=-1) - f)
        return q[..., :, None] * np.eye(self.samples)


# --- the operator ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SuperOperator:
    dim: int
    action: np.ndarray
    structure: object = field(default=None)

    def __post_init__(self):
        n2 = self.dim * self.dim
        act = np.asarray(self.action, dtype=complex)
        if act.shape != (n2, n2):
            raise DimensionMismatch(f"action shape {act.shape} does not fit dimension {self.dim}")
        if not np.all(np.isfinite(act)):
            raise ValueError("superoperator action has non-finite entries")
        object.__setattr__(self, "action", frozen(act))

    @property
    def kind(self) -> str:
        return "dense" if self.structure is None else type(self.structure).__name__

    def apply(self, a) -> np.ndarray:
        """Image of ``a``; ``a`` may be a stack with shape (..., n, n).

        Structures that evaluate stacks directly (multiplications,
        sandwiches, Volterra) bypass the n^2 x n^2 action; the two paths
        are compared by :meth:`structure_discrepancy`.
        """
        a = np.asarray(a, dtype=complex)
        if a.shape[-2:] != (self.dim, self.dim):
            raise DimensionMismatch(f"operator on M_{self.dim} applied to shape {a.shape}")
        if getattr(self.structure, "stackable", False):
            return np.asarray(self.structure.evaluate(a), dtype=complex)
        return self.dense_apply(a)

    def dense_apply(self, a) -> np.ndarray:
        """Image computed from the vectorized action matrix."""
        a = np.asarray(a, dtype=complex)
        return unvec(vec(a) @ self.action.T, self.dim)

    __call__ = apply

    def __add__(self, other):
        _same_dim(self, other)
        return SuperOperator(self.dim, self.action + other.action)

    def __sub__(self, other):
        _same_dim(self, other)
        return SuperOperator(self.dim, self.action - other.action)

    def __neg__(self):
        return SuperOperator(self.dim, -self.action)

    def __mul__(self, scalar):
        return SuperOperator(self.dim, complex(scalar) * self.action)

    __rmul__ = __mul__

    def with_structure(self, structure):
        return SuperOperator(self.dim, self.action, structure)

    def structure_discrepancy(self) -> float:
        """Max over matrix units of |dense(E_ij) - formula(E_ij)|; 0 if untagged."""
        if self.structure is None:
            return 0.0
        n = self.dim
        worst = 0.0
        for k in range(n * n):
            e = unvec(np.eye(n * n, dtype=complex)[k], n)
            worst = max(worst, operator_norm(self.dense_apply(e) - self.structure.evaluate(e)))
        return worst


def _same_dim(s: SuperOperator, t: SuperOperator):
    if s.dim != t.dim:
        raise DimensionMismatch(f"superoperators on M_{s.dim} and M_{t.dim}")


def from_function(n: int, fn: Callable[[np.ndarray], np.ndarray], structure=None) -> SuperOperator:
    """Dense operator from a linear function, sampled on the vectorized unit basis."""
    eye = np.eye(n * n, dtype=complex)
    cols = [vec(np.asarray(fn(unvec(eye[k], n)), dtype=complex)) for k in range(n * n)]
    return SuperOperator(n, np.stack(cols, axis=1), structure)


def from_structure(n: int, structure) -> SuperOperator:
    return from_function(n, structure.evaluate, structure)


def identity(n: int) -> SuperOperator:
    return SuperOperator(n, np.eye(n * n))


def zero(n: int) -> SuperOperator:
    return SuperOperator(n, np.zeros((n * n, n * n)))


def left_mult(p) -> SuperOperator:
    p = p.matrix if isinstance(p, Projection) else as_matrix(p, square=True)
    n = p.shape[0]
    return SuperOperator(n, np.kron(np.eye(n), p), LeftMult(frozen(p)))


def right_mult(q) -> SuperOperator:
    q = q.matrix if isinstance(q, Projection) else as_matrix(q, square=True)
    n = q.shape[0]
    return SuperOperator(n, np.kron(q.T, np.eye(n)), RightMult(frozen(q)))


def sandwich(terms) -> SuperOperator:
    terms = tuple((frozen(as_matrix(x, square=True)), frozen(as_matrix(y, square=True))) for x, y in terms)
    n = terms[0][0].shape[0]
    action = sum(np.kron(y.T, x) for x, y in terms)
    return SuperOperator(n, action, Sandwich(terms))


def inner_derivation(m) -> SuperOperator:
    """x -> [m, x]."""
    m = as_matrix(m, square=True)
    n = m.shape[0]
    eye = np.eye(n)
    return SuperOperator(n, np.kron(eye, m) - np.kron(m.T, eye))


def conjugated(T: SuperOperator, u) -> SuperOperator:
    """a -> u T(u* a u) u* for a unitary u."""
    u = as_matrix(u, square=True)
    ad_u = np.kron(u.conj(), u)
    ad_ustar = np.kron(u.T, adjoint(u))
    return SuperOperator(T.dim, ad_u @ T.action @ ad_ustar)


def compose(S: SuperOperator, T: SuperOperator) -> SuperOperator:
    """S after T."""
    _same_dim(S, T)
    return SuperOperator(S.dim, S.action @ T.action)


def invert(T: SuperOperator, cond_limit: float = INVERSION_COND_LIMIT) -> SuperOperator:
    s = np.linalg.svd(T.action, compute_uv=False)
    cond = np.inf if s[-1] == 0 else s[0] / s[-1]
    if not cond < cond_limit:
        raise NotInvertible(f"action is singular or ill-conditioned (condition number {cond:.3e})")
    return SuperOperator(T.dim, np.linalg.inv(T.action))


def derivation_defect(D: SuperOperator, a, b) -> float:
    """|D(ab) - D(a) b - a D(b)|."""
    a, b = as_matrix(a, square=True), as_matrix(b, square=True)
    return operator_norm(D.apply(a @ b) - D.apply(a) @ b - a @ D.apply(b))


@dataclass(frozen=True)
class NormEstimate:
    """Best ratio |T(a)|/|a| found, with the maximizing element."""

    value: float
    witness: np.ndarray


def superop_norm(
    T: SuperOperator, domain: list | None = None, starts: int = 32, seed: int = 0
) -> NormEstimate:
    """Induced operator-norm -> operator-norm size of ``T``.

    The supremum is searched over the span of ``domain`` (all of M_n when
    None).  Candidates are the basis elements, the top singular vector of the
    action restricted to the domain, and ``starts`` seeded random points;
    each is refined by a local optimizer.  The result is a certified lower
    bound with its witness.
    """
    n = T.dim
    if domain is None:
        domain = [unvec(e, n) for e in np.eye(n * n, dtype=complex)]
    domain = [as_matrix(x, square=True) for x in domain]
    if not domain:
        return NormEstimate(0.0, np.zeros((n, n), dtype=complex))
    basis = np.stack(domain)
    images = T.apply(basis)
    k = len(domain)

    def element(c):
        return np.tensordot(c, basis, axes=1), np.tensordot(c, images, axes=1)

    def ratio(c):
        a, ta = element(c)
        na = operator_norm(a)
        return 0.0 if na < 1e-300 else operator_norm(ta) / na

    def objective(x):
        return -ratio(x[:k] + 1j * x[k:])

    cands = list(np.eye(k, dtype=complex))
    B = np.stack([vec(x) for x in domain], axis=1)
    TB = np.stack([vec(x) for x in images], axis=1)
    q, r = np.linalg.qr(B)
    rinv = np.linalg.pinv(r)
    _, _, vh = np.linalg.svd(TB @ rinv)
    cands.append(rinv @ vh[0].conj())
    rng = np.random.default_rng(seed)
    for _ in range(starts):
        cands.append(rng.standard_normal(k) + 1j * rng.standard_normal(k))

    best_val, best_c = -1.0, cands[0]
    for c in cands:
        val = ratio(c)
        if val > best_val:
            best_val, best_c = val, c
    # refine the best few candidates
    scored = sorted(cands, key=ratio, reverse=True)[:4]
    for c in scored:
        x0 = np.concatenate([c.real, c.imag])
        res = scipy.optimize.minimize(objective, x0, method="Nelder-Mead" if k <= 2 else "BFGS",
                                      options={"maxiter": 200})
        c2 = res.x[:k] + 1j * res.x[k:]
        val = ratio(c2)
        if val > best_val:
            best_val, best_c = val, c2
    a, _ = element(best_c)
    na = operator_norm(a)
    return NormEstimate(float(best_val), a / na if na > 0 else a)


def image_discrepancy(S: SuperOperator, T: SuperOperator, basis=None) -> float:
    """Max over basis of |S(a) - T(a)|; matrix units by default."""
    _same_dim(S, T)
    if basis is None:
        n = S.dim
        basis = np.stack([unvec(e, n) for e in np.eye(n * n, dtype=complex)])
    basis = np.asarray(basis)
    if basis.size == 0:
        return 0.0
    return float(np.max(operator_norms(S.apply(basis) - T.apply(basis))))
