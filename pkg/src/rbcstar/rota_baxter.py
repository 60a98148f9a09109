"""Residuals and certification for the Rota-Baxter identity

    P(a) P(b) = P(a P(b)) + P(P(a) b) + lambda P(ab),

together with symmetry, matching and idempotency defects.

Every term of the identity is bilinear in (a, b), so evaluating it on all
ordered pairs of a linear basis of a space certifies it on the whole span.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_TOL,
    Projection,
    adjoint,
    as_matrix,
    compress,
    operator_norm,
    operator_norms,
)
from .errors import CertificationFailed, DimensionMismatch
from .sampling import complex_gaussian
from .spaces import AlgebraSpace, FullAlgebra
from .superop import SuperOperator, compose, identity

# complex entries per chunk when batching pair residuals
_CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True)
class Certificate:
    """Outcome of a certification sweep.

    ``witness`` is the basis index pair (i, j) of the worst residual in
    exhaustive mode, or the trial number in randomized mode.
    ``invariance_residual`` is the largest distance of P(basis) from the
    space.
    """

    max_residual: float
    probe_mode: str
    tol: float
    witness: tuple | None = None
    trials: int | None = None
    seed: int | None = None
    pairs_checked: int = 0
    invariance_residual: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol and self.invariance_residual <= self.tol


@dataclass(frozen=True, eq=False)
class RotaBaxterOperator:
    op: SuperOperator
    weight: complex
    space: AlgebraSpace
    certificate: Certificate
    notes: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.op.dim

    def apply(self, a):
        return self.op.apply(a)

    __call__ = apply


def rb_residual(P: SuperOperator, weight: complex, a, b) -> float:
    a, b = as_matrix(a, square=True), as_matrix(b, square=True)
    if a.shape != (P.dim, P.dim) or b.shape != a.shape:
        raise DimensionMismatch("probe sizes do not match the operator")
    pa, pb = P.apply(a), P.apply(b)
    r = pa @ pb - P.apply(a @ pb) - P.apply(pa @ b) - weight * P.apply(a @ b)
    return operator_norm(r)


def rb_residual_grid(P: SuperOperator, weight: complex, left, right) -> np.ndarray:
    """Residuals for all pairs (left[i], right[j]) as a len(left) x len(right) array."""
    A, B = np.asarray(left, dtype=complex), np.asarray(right, dtype=complex)
    if len(A) == 0 or len(B) == 0:
        return np.zeros((len(A), len(B)))
    PA, PB = P.apply(A), P.apply(B)
    n = P.dim
    step = max(1, _CHUNK_ENTRIES // (len(B) * n * n))
    out = np.empty((len(A), len(B)))
    for s in range(0, len(A), step):
        a, pa = A[s : s + step, None], PA[s : s + step, None]
        lhs = pa @ PB[None]
        inner = a @ PB[None] + pa @ B[None] + weight * (a @ B[None])
        out[s : s + step] = operator_norms(lhs - P.apply(inner))
    return out


def _invariance(P: SuperOperator, space: AlgebraSpace) -> float:
    basis = space.basis
    if not basis or isinstance(space, FullAlgebra):
        return 0.0
    return float(np.max(space.distance(P.apply(np.stack(basis)))))


def certify_rb(
    P: SuperOperator,
    weight: complex,
    space: AlgebraSpace | None = None,
    tol: float = DEFAULT_TOL,
    mode: str = "exhaustive",
    trials: int = 200,
    seed: int = 0,
    raise_on_failure: bool = True,
    notes: dict | None = None,
) -> RotaBaxterOperator:
    """Certify P as a Rota-Baxter operator of the given weight on ``space``.

    Exhaustive mode checks all ordered basis pairs; ``random`` mode checks
    ``trials`` seeded pairs of random unit-norm elements of the space.  The
    operator must also map the space into itself.
    """
    if space is None:
        space = FullAlgebra(P.dim)
    if space.dim != P.dim:
        raise DimensionMismatch(f"operator on M_{P.dim}, space in M_{space.dim}")
    weight = complex(weight)
    basis = space.basis
    if mode == "exhaustive":
        grid = rb_residual_grid(P, weight, basis, basis)
        if grid.size:
            flat = int(np.argmax(grid))
            witness = tuple(int(x) for x in np.unravel_index(flat, grid.shape))
            worst = float(grid.flat[flat])
        else:
            witness, worst = None, 0.0
        cert = Certificate(worst, "exhaustive", tol, witness, pairs_checked=grid.size,
                           invariance_residual=_invariance(P, space))
    elif mode == "random":
        rng = np.random.default_rng(seed)
        stack = np.stack(basis) if basis else np.zeros((0, P.dim, P.dim))
        worst, witness = 0.0, None
        for t in range(trials):
            a, b = (_random_element(rng, stack) for _ in range(2))
            r = rb_residual(P, weight, a, b)
            if r > worst:
                worst, witness = r, (t,)
        cert = Certificate(worst, "random", tol, witness, trials=trials, seed=seed,
                           pairs_checked=trials, invariance_residual=_invariance(P, space))
    else:
        raise ValueError(f"unknown probe mode {mode!r}")
    if raise_on_failure and not cert.passed:
        raise CertificationFailed(
            f"Rota-Baxter identity of weight {weight} fails: residual {cert.max_residual:.3e}, "
            f"invariance {cert.invariance_residual:.3e} (tol {tol:.1e})",
            witness=cert.witness,
            residual=cert.max_residual,
            certificate=cert,
        )
    return RotaBaxterOperator(P, weight, space, cert, dict(notes or {}))


def _random_element(rng, basis_stack):
    if len(basis_stack) == 0:
        return np.zeros(basis_stack.shape[1:], dtype=complex)
    c = complex_gaussian(rng, len(basis_stack))
    a = np.tensordot(c, basis_stack, axes=1)
    na = operator_norm(a)
    return a / na if na > 0 else a


def random_pair_witness(space: AlgebraSpace, trial: int, seed: int):
    """Recreate the probe pair of a randomized certificate."""
    rng = np.random.default_rng(seed)
    stack = np.stack(space.basis)
    for t in range(trial + 1):
        a, b = (_random_element(rng, stack) for _ in range(2))
    return a, b


def tilde(R: RotaBaxterOperator) -> RotaBaxterOperator:
    """-lambda id - P, re-certified at the same weight."""
    cert = R.certificate
    op = SuperOperator(R.dim, -R.weight * identity(R.dim).action - R.op.action)
    return certify_rb(op, R.weight, R.space, cert.tol, cert.probe_mode,
                      trials=cert.trials or 200, seed=cert.seed or 0)


def symmetry_defects(P: SuperOperator, probes) -> list[float]:
    probes = [as_matrix(a, square=True) for a in probes]
    if not probes:
        return []
    stack = np.stack(probes)
    if stack.shape[-1] != P.dim:
        raise DimensionMismatch("probe size does not match the operator")
    return [float(x) for x in operator_norms(P.apply(adjoint(stack)) - adjoint(P.apply(stack)))]


def symmetry_defect(P: SuperOperator, probes) -> float:
    """max |P(a*) - P(a)*| over the probes.

    The map a -> P(a*) - P(a)* is conjugate-linear, so a zero defect on a
    spanning set means symmetry on the span.
    """
    return max(symmetry_defects(P, probes), default=0.0)


def matching_defect(P: SuperOperator, weight: complex, f, a, x) -> float:
    """|P(a) f(x) - f(P(a) x) - f(a f(x)) - lambda f(a x)| for a vector x."""
    f, a = as_matrix(f, square=True), as_matrix(a, square=True)
    x = np.asarray(x, dtype=complex)
    x = as_matrix(x.reshape(-1, 1) if x.ndim == 1 else x)
    if a.shape != (P.dim, P.dim) or f.shape != a.shape or x.shape != (P.dim, 1):
        raise DimensionMismatch("matching probes do not fit the operator")
    pa = P.apply(a)
    r = pa @ f @ x - f @ pa @ x - f @ a @ f @ x - weight * (f @ a @ x)
    return float(np.linalg.norm(r))


@dataclass(frozen=True)
class MatchingSweep:
    max_defect: float
    witness: tuple | None  # (basis index, coordinate index)

    def ok(self, tol: float = DEFAULT_TOL) -> bool:
        return self.max_defect <= tol


def matching_sweep(P: SuperOperator, weight: complex, f, basis) -> MatchingSweep:
    """matching_defect over all pairs (basis[i], e_k).

    Bilinear in (a, x), so this certifies matching on span(basis) x C^n.
    Column k of the residual matrix R(a) is the residual at x = e_k.
    """
    f = as_matrix(f, square=True)
    basis = [as_matrix(a, square=True) for a in basis]
    if not basis:
        return MatchingSweep(0.0, None)
    A = np.stack(basis)
    PA = P.apply(A)
    R = PA @ f - f @ PA - f @ A @ f - complex(weight) * (f @ A)
    cols = np.linalg.norm(R, axis=-2)  # (k, n)
    flat = int(np.argmax(cols))
    i, k = np.unravel_index(flat, cols.shape)
    return MatchingSweep(float(cols.flat[flat]), (int(i), int(k)))


@dataclass(frozen=True)
class CriterionResult:
    ok: bool
    worst: float
    witness: int | None  # index into the basis
    lower_block: float = 0.0
    upper_block: float = 0.0


def matching_matrix_criterion(P: SuperOperator, p: Projection, basis, tol: float = DEFAULT_TOL) -> CriterionResult:
    """Block test for weight -1 matching: P(a)_21 = 0 and P(a)_12 = a_12.

    Only meaningful for weight -1, where it is equivalent to matching p.
    """
    if p.dim != P.dim:
        raise DimensionMismatch("projection and operator sizes differ")
    worst, witness, low_w, up_w = 0.0, None, 0.0, 0.0
    for idx, a in enumerate(basis):
        a = as_matrix(a, square=True)
        da, dp = compress(a, p), compress(P.apply(a), p)
        low = operator_norm(dp.a21)
        up = operator_norm(dp.a12 - da.a12)
        low_w, up_w = max(low_w, low), max(up_w, up)
        if max(low, up) > worst:
            worst, witness = max(low, up), idx
    return CriterionResult(worst <= tol, worst, witness, low_w, up_w)


def idempotency_defect(P: SuperOperator, basis=None) -> float:
    """max over basis of |P(P(a)) - P(a)|; matrix units by default."""
    PP = compose(P, P)
    if basis is None:
        basis = FullAlgebra(P.dim).basis
    if len(basis) == 0:
        return 0.0
    stack = np.stack([as_matrix(a, square=True) for a in basis])
    return float(np.max(operator_norms(PP.apply(stack) - P.apply(stack))))
