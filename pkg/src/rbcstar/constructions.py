"""Constructive recipes for Rota-Baxter operators and the correspondences
between them.

Block-diagonal algebras B(pH) + B(p⊥H) are represented in the adapted
coordinates of the projection (``Projection.basis``): as the direct sum
``DirectSumAlgebra((rank p, n - rank p))`` inside M_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import (
    DEFAULT_TOL,
    Projection,
    adjoint,
    as_matrix,
    from_block_coordinates,
    frozen,
    operator_norms,
    to_block_coordinates,
    vec,
)
from .errors import (
    CertificationFailed,
    DimensionMismatch,
    NonRealWeight,
    NotCommutative,
    NotDirectSum,
    NotIdempotent,
    NotMatching,
    NotSubalgebra,
    NotSymmetric,
    WeightMismatch,
    WrongWeight,
)
from .rota_baxter import (
    Certificate,
    RotaBaxterOperator,
    certify_rb,
    idempotency_defect,
    matching_matrix_criterion,
    symmetry_defect,
)
from .spaces import AlgebraSpace, DirectSumAlgebra, FullAlgebra, SpanAlgebra, diagonal_algebra
from .superop import (
    DirectSumOp,
    DiscreteVolterra,
    ProjectionOntoSummand,
    SuperOperator,
    Triangular,
    from_function,
    from_structure,
    left_mult,
    superop_norm,
)

NORM_SLACK = 1e-8


def _require_weight(R: RotaBaxterOperator, weight: complex = -1, tol: float = 1e-12):
    if abs(complex(R.weight) - weight) > tol:
        raise WrongWeight(f"expected weight {weight}, got {R.weight}")


# --- L_p, triangular and direct sums ---------------------------------------


def left_mult_projection(p: Projection, tol: float = DEFAULT_TOL) -> RotaBaxterOperator:
    """a -> p a, certified at weight -1 on M_n."""
    return certify_rb(left_mult(p), -1, FullAlgebra(p.dim), tol)


def triangular_rb(P1: RotaBaxterOperator, P2: RotaBaxterOperator, p: Projection,
                  tol: float = DEFAULT_TOL) -> RotaBaxterOperator:
    """(a11, a12; a21, a22) -> (P1(a11), a12; 0, P2(a22)) relative to p."""
    for R in (P1, P2):
        if abs(complex(R.weight) + 1) > 1e-12:
            raise WeightMismatch(f"triangular construction needs weight -1 inputs, got {R.weight}")
    if P1.dim != p.rank or P2.dim != p.corank:
        raise DimensionMismatch(
            f"block operators of sizes {P1.dim}, {P2.dim} for projection of rank {p.rank} in C^{p.dim}"
        )
    op = from_structure(p.dim, Triangular(P1.op, P2.op, p))
    R = certify_rb(op, -1, FullAlgebra(p.dim), tol)
    crit = matching_matrix_criterion(op, p, R.space.basis, tol)
    R.notes["matching_criterion"] = crit.worst
    return R


def direct_sum_rb(P1: RotaBaxterOperator, P2: RotaBaxterOperator, tol: float | None = None) -> RotaBaxterOperator:
    """Componentwise operator on the block-diagonal sum of the two spaces."""
    if abs(complex(P1.weight) - complex(P2.weight)) > 1e-12:
        raise WeightMismatch(f"weights differ: {P1.weight} vs {P2.weight}")
    tol = max(P1.certificate.tol, P2.certificate.tol) if tol is None else tol
    space = DirectSumAlgebra((P1.space, P2.space))
    op = from_structure(space.dim, DirectSumOp((P1.op, P2.op), (P1.dim, P2.dim)))
    return certify_rb(op, P1.weight, space, tol)


# --- matching correspondence -------------------------------------------------


def block_diagonal_space(p: Projection) -> DirectSumAlgebra:
    return DirectSumAlgebra((p.rank, p.corank))


def _pinch(b: np.ndarray, r: int) -> np.ndarray:
    out = np.array(b, dtype=complex)
    out[..., :r, r:] = 0
    out[..., r:, :r] = 0
    return out


def _upper(b: np.ndarray, r: int) -> np.ndarray:
    out = np.zeros_like(b, dtype=complex)
    out[..., :r, r:] = b[..., :r, r:]
    return out


def phi_restrict(P: RotaBaxterOperator, p: Projection, tol: float = DEFAULT_TOL) -> RotaBaxterOperator:
    """Restriction of a weight -1 operator matching p to B(pH) + B(p⊥H).

    The block criterion is checked first on all matrix units; failure raises
    :class:`NotMatching` carrying the offending basis index.  The result
    acts in the adapted coordinates of p.
    """
    _require_weight(P)
    if P.dim != p.dim:
        raise DimensionMismatch("operator and projection sizes differ")
    basis = FullAlgebra(p.dim).basis
    crit = matching_matrix_criterion(P.op, p, basis, tol)
    if not crit.ok:
        raise NotMatching(
            f"operator does not match p: |P(a)_21| = {crit.lower_block:.3e}, "
            f"|P(a)_12 - a_12| = {crit.upper_block:.3e}",
            witness=crit.witness,
            residual=crit.worst,
        )
    if not P.certificate.passed:
        P = certify_rb(P.op, -1, FullAlgebra(P.dim), tol)
    r = p.rank

    def restricted(x):
        return to_block_coordinates(P.op.apply(from_block_coordinates(_pinch(x, r), p)), p)

    op = from_function(p.dim, restricted)
    return certify_rb(op, -1, block_diagonal_space(p), tol)


def psi_extend(Pp: RotaBaxterOperator, p: Projection, tol: float = DEFAULT_TOL) -> RotaBaxterOperator:
    """P(a) = P'(diag(a11, a22)) + (0, a12; 0, 0), certified on M_n."""
    _require_weight(Pp)
    if Pp.dim != p.dim:
        raise DimensionMismatch("operator and projection sizes differ")
    space = Pp.space
    if isinstance(space, DirectSumAlgebra) and tuple(x.dim for x in space.parts) != (p.rank, p.corank):
        raise DimensionMismatch(f"operator lives on blocks {[x.dim for x in space.parts]}, p has rank {p.rank}")
    r = p.rank

    def extended(a):
        b = to_block_coordinates(a, p)
        return from_block_coordinates(Pp.op.apply(_pinch(b, r)) + _upper(b, r), p)

    op = from_function(p.dim, extended)
    R = certify_rb(op, -1, FullAlgebra(p.dim), tol)
    crit = matching_matrix_criterion(op, p, R.space.basis, tol)
    if not crit.ok:
        raise CertificationFailed("extension does not match p", witness=crit.witness, residual=crit.worst)
    R.notes["matching_criterion"] = crit.worst
    return R


# --- symmetric <-> real-linear -------------------------------------------------


def self_adjoint_basis(space: AlgebraSpace) -> list[np.ndarray]:
    """A real basis of the self-adjoint part of ``space``.

    Candidates (b + b*)/2 and (b - b*)/(2i) for each basis element b are
    kept greedily when real-linearly independent of those already chosen.
    """
    chosen, rows = [], []
    for b in space.basis:
        for c in ((b + adjoint(b)) / 2, (b - adjoint(b)) / 2j):
            v = _realvec(c)
            if rows:
                q, _ = np.linalg.qr(np.stack(rows, axis=1))
                resid = v - q @ (q.T @ v)
            else:
                resid = v
            if np.linalg.norm(resid) > 1e-10 * max(np.linalg.norm(v), 1e-300) and np.linalg.norm(v) > 1e-14:
                chosen.append(c)
                rows.append(v)
    return chosen


def _realvec(a):
    v = vec(np.asarray(a, dtype=complex))
    return np.concatenate([v.real, v.imag], axis=-1)


@dataclass(frozen=True, eq=False)
class RealRBOperator:
    """Real-linear operator on the self-adjoint part of a commutative space.

    ``matrix`` acts on real coordinates with respect to ``sa_basis``.
    """

    space: AlgebraSpace
    sa_basis: tuple
    matrix: np.ndarray
    weight: float
    certificate: Certificate | None = None

    @property
    def _design(self):
        return np.stack([_realvec(s) for s in self.sa_basis], axis=1)

    def coordinates(self, a) -> np.ndarray:
        """Real least-squares coordinates of a self-adjoint ``a`` (stacks allowed)."""
        v = _realvec(a)
        return np.linalg.lstsq(self._design, v.T, rcond=None)[0].T

    def from_coordinates(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=float), np.stack(self.sa_basis), axes=1)

    def apply(self, a):
        return self.from_coordinates(self.coordinates(a) @ self.matrix.T)

    __call__ = apply


def certify_real_rb(space: AlgebraSpace, sa_basis, matrix, weight: float,
                    tol: float = DEFAULT_TOL, raise_on_failure: bool = True) -> RealRBOperator:
    """Exhaustive Rota-Baxter check of a real-linear operator over the self-adjoint basis."""
    sa_basis = tuple(frozen(s) for s in sa_basis)
    matrix = np.array(matrix, dtype=float)
    probe = RealRBOperator(space, sa_basis, matrix, float(weight))
    k = len(sa_basis)
    S = np.stack(sa_basis) if k else np.zeros((0, space.dim, space.dim))
    PS = probe.apply(S) if k else S
    worst, witness = 0.0, None
    for i in range(k):
        a, pa = S[i], PS[i]
        lhs = pa[None] @ PS
        inner = a[None] @ PS + pa[None] @ S + weight * (a[None] @ S)
        res = operator_norms(lhs - probe.apply(inner))
        j = int(np.argmax(res))
        if res[j] > worst:
            worst, witness = float(res[j]), (i, j)
    closure = 0.0
    if k:
        closure = float(np.max(operator_norms(PS - adjoint(PS))))
    cert = Certificate(worst, "exhaustive", tol, witness, pairs_checked=k * k, invariance_residual=closure)
    if raise_on_failure and not cert.passed:
        raise CertificationFailed(f"real Rota-Baxter identity fails: residual {worst:.3e}",
                                  witness=witness, residual=worst, certificate=cert)
    return RealRBOperator(space, sa_basis, matrix, float(weight), cert)


def _check_commutative(space: AlgebraSpace, tol: float):
    if not space.is_commutative(tol):
        raise NotCommutative("space is not commutative")


def real_restrict(R: RotaBaxterOperator, tol: float = DEFAULT_TOL) -> RealRBOperator:
    """Restriction of a symmetric operator on a commutative space to its self-adjoint part."""
    _check_commutative(R.space, tol)
    if abs(complex(R.weight).imag) > 1e-12:
        raise NonRealWeight(f"weight {R.weight} is not real")
    sym = symmetry_defect(R.op, R.space.basis)
    if sym > tol:
        raise NotSymmetric(f"operator is not symmetric: defect {sym:.3e}", residual=sym)
    sa = self_adjoint_basis(R.space)
    shell = RealRBOperator(R.space, tuple(sa), np.eye(len(sa)), float(complex(R.weight).real))
    images = R.op.apply(np.stack(sa)) if sa else np.zeros((0, R.dim, R.dim))
    matrix = shell.coordinates(images).T if sa else np.zeros((0, 0))
    return certify_real_rb(R.space, sa, matrix, complex(R.weight).real, tol)


def symmetric_from_real(P1: RealRBOperator, tol: float = DEFAULT_TOL,
                        allow_noncommutative: bool = False):
    """P(a) = P1((a + a*)/2) + i P1((a - a*)/(2i)).

    Returns a certified :class:`RotaBaxterOperator`.  With
    ``allow_noncommutative`` the commutativity check and all certification
    are skipped and the bare :class:`SuperOperator` is returned.
    """
    w = complex(P1.weight)
    if abs(w.imag) > 1e-12:
        raise NonRealWeight(f"weight {P1.weight} is not real")
    if not allow_noncommutative:
        _check_commutative(P1.space, tol)

    def extended(a):
        a1 = (a + adjoint(a)) / 2
        a2 = (a - adjoint(a)) / 2j
        return P1.apply(a1) + 1j * P1.apply(a2)

    op = from_function(P1.space.dim, extended)
    if allow_noncommutative:
        return op
    R = certify_rb(op, w.real, P1.space, tol)
    sym = symmetry_defect(op, P1.space.basis)
    R.notes["symmetry_defect"] = sym
    if sym > tol:
        raise NotSymmetric(f"reconstructed operator is not symmetric: {sym:.3e}", residual=sym)
    return R


def real_summation(samples: int, tol: float = DEFAULT_TOL) -> RealRBOperator:
    """Strict left-endpoint summation on real samples, weight 1/samples."""
    h = 1.0 / samples
    space = diagonal_algebra(samples)
    sa = self_adjoint_basis(space)
    return certify_real_rb(space, sa, h * np.tril(np.ones((samples, samples)), -1), h, tol)


# --- idempotent symmetric operators and decompositions ---------------------------


@dataclass(frozen=True, eq=False)
class DecompositionPair:
    """Bases of two C*-subalgebras A1, A2 of M_n whose sum is direct."""

    dim: int
    a1_basis: tuple
    a2_basis: tuple
    residuals: dict = field(default_factory=dict)

    @property
    def space(self) -> SpanAlgebra:
        return SpanAlgebra(self.dim, self.a1_basis + self.a2_basis, certify=False)


def certify_decomposition(a1_basis, a2_basis, dim: int | None = None, tol: float = DEFAULT_TOL) -> DecompositionPair:
    a1 = tuple(frozen(as_matrix(x, square=True)) for x in a1_basis)
    a2 = tuple(frozen(as_matrix(x, square=True)) for x in a2_basis)
    if dim is None:
        dim = (a1 + a2)[0].shape[0]
    residuals = {}
    for name, gens in (("a1", a1), ("a2", a2)):
        span = SpanAlgebra(dim, gens, tol, certify=False)
        if len(span.basis) != len(gens):
            raise NotDirectSum(f"{name} basis is linearly dependent")
        res = span.closure_residuals()
        residuals[name] = res
        if res["adjoint"] > tol or res["product"] > tol:
            raise NotSubalgebra(f"span of {name} is not a C*-subalgebra: {res}")
    union = a1 + a2
    if union:
        s = np.linalg.svd(np.stack([vec(x) for x in union], axis=1), compute_uv=False)
        residuals["independence"] = float(s[-1] / s[0])
        if s[-1] <= tol * s[0]:
            raise NotDirectSum("the two spans intersect nontrivially")
    return DecompositionPair(dim, a1, a2, residuals)


def projection_rb_from_decomposition(d: DecompositionPair, tol: float = DEFAULT_TOL, seed: int = 0) -> RotaBaxterOperator:
    """Projection onto A1 along A2, certified idempotent, symmetric, weight -1
    and of induced norm at most 1 on A1 + A2."""
    n = d.dim
    op = from_structure(n, ProjectionOntoSummand(d.a1_basis, d.a2_basis))
    space = d.space
    R = certify_rb(op, -1, space, tol)
    basis = space.basis
    idem = idempotency_defect(op, basis)
    sym = symmetry_defect(op, basis)
    norm = superop_norm(op, basis, seed=seed)
    R.notes.update(idempotency_defect=idem, symmetry_defect=sym, norm_witness=norm.value)
    if idem > tol:
        raise NotIdempotent(f"projection is not idempotent: {idem:.3e}", residual=idem)
    if sym > tol:
        raise NotSymmetric(f"projection is not symmetric: {sym:.3e}", residual=sym)
    if norm.value > 1 + NORM_SLACK:
        raise CertificationFailed(f"norm witness {norm.value:.12f} exceeds 1", residual=norm.value)
    return R


def _range_basis(images: np.ndarray, n: int, tol: float) -> list[np.ndarray]:
    if len(images) == 0:
        return []
    M = np.stack([vec(x) for x in images], axis=1)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0:
        return []
    r = int(np.sum(s > tol * s[0]))
    return [np.swapaxes(u[:, k].reshape(n, n), 0, 1).copy() for k in range(r)]


def decompose_from_rb(R: RotaBaxterOperator, tol: float = DEFAULT_TOL) -> DecompositionPair:
    """Ranges of P and id - P over the operator's space."""
    _require_weight(R)
    basis = R.space.basis
    idem = idempotency_defect(R.op, basis)
    if idem > tol:
        raise NotIdempotent(f"operator is not idempotent: {idem:.3e}", residual=idem)
    sym = symmetry_defect(R.op, basis)
    if sym > tol:
        raise NotSymmetric(f"operator is not symmetric: {sym:.3e}", residual=sym)
    stack = np.stack(basis) if basis else np.zeros((0, R.dim, R.dim))
    images = R.op.apply(stack) if basis else stack
    a1 = _range_basis(images, R.dim, tol)
    a2 = _range_basis(stack - images, R.dim, tol)
    return certify_decomposition(a1, a2, R.dim, tol)


def principal_angles(first, second) -> np.ndarray:
    """Principal angles between the spans of two lists of matrices."""
    if len(first) == 0 and len(second) == 0:
        return np.zeros(0)
    if len(first) == 0 or len(second) == 0:
        return np.full(max(len(first), len(second)), np.pi / 2)
    A = np.stack([vec(x) for x in first], axis=1)
    B = np.stack([vec(x) for x in second], axis=1)
    if A.shape[1] != B.shape[1]:
        return np.full(max(A.shape[1], B.shape[1]), np.pi / 2)
    return scipy.linalg.subspace_angles(A, B)


# --- discrete Volterra -------------------------------------------------------


def volterra_operator(samples: int) -> SuperOperator:
    return from_structure(samples, DiscreteVolterra(samples))


def volterra_discrete(samples: int, tol: float = DEFAULT_TOL) -> RotaBaxterOperator:
    """Q(f)_k = h sum_{j<k} f_j on the diagonal algebra of M_samples, h = 1/samples.

    The double strict sum splits as i<j, j<i and i=j, so Q is Rota-Baxter
    of weight exactly h.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return certify_rb(volterra_operator(samples), 1.0 / samples, diagonal_algebra(samples), tol)


def sample(fn, samples: int) -> np.ndarray:
    """diag(fn(k/M)) for k = 0..M-1 (left endpoints)."""
    x = np.arange(samples) / samples
    return np.diag(np.asarray(fn(x), dtype=complex))


def volterra_probe_residual(samples: int, weight: complex, f=lambda x: x, g=lambda x: x**2) -> float:
    """Rota-Baxter residual of the discrete Volterra operator on two sampled
    functions, evaluated with the summation formula (no dense action, so
    large sample counts are cheap)."""
    Q = DiscreteVolterra(samples).evaluate
    a, b = sample(f, samples), sample(g, samples)
    qa, qb = Q(a), Q(b)
    r = qa @ qb - Q(a @ qb) - Q(qa @ b) - complex(weight) * Q(a @ b)
    return float(np.max(np.abs(np.diag(r))))
