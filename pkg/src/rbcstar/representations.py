"""*-homomorphisms, Rota-Baxter *-representations and the direct-sum
representation construction, all stored as images of source basis elements."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constructions import direct_sum_rb, psi_extend
from .core import (
    DEFAULT_TOL,
    Projection,
    adjoint,
    as_matrix,
    compress,
    frozen,
    from_block_coordinates,
    operator_norm,
    operator_norms,
)
from .errors import (
    CertificationFailed,
    DimensionMismatch,
    NotInvariant,
    NotInvolutive,
    NotMultiplicative,
    SupportViolation,
    UncertifiedInput,
    WeightMismatch,
    WrongWeight,
)
from .rota_baxter import (
    CriterionResult,
    RotaBaxterOperator,
    certify_rb,
    matching_matrix_criterion,
    matching_sweep,
    symmetry_defects,
)
from .spaces import AlgebraSpace, DirectSumAlgebra, FullAlgebra
from .superop import from_function, sandwich


def _worst_pair(residuals: np.ndarray, frob: np.ndarray) -> tuple[int, int]:
    # max operator-norm residual; ties broken by Frobenius size, then lexicographically
    top = residuals.max()
    cand = np.argwhere(residuals >= top - 1e-15)
    best = max(cand.tolist(), key=lambda ij: (frob[ij[0], ij[1]], -ij[0], -ij[1]))
    return int(best[0]), int(best[1])


@dataclass(frozen=True, eq=False)
class StarHomomorphism:
    source: AlgebraSpace
    target: AlgebraSpace
    images: tuple
    multiplicativity_defect: float = 0.0
    involution_defect: float = 0.0

    def apply(self, a) -> np.ndarray:
        """Image of an element of the source (or a stack of them)."""
        a = np.asarray(a, dtype=complex)
        flat = a.reshape(-1, *a.shape[-2:])
        coords = np.stack([self.source.coordinates(x) for x in flat])
        out = np.tensordot(coords, np.stack(self.images), axes=1)
        return out.reshape(a.shape[:-2] + out.shape[-2:])

    __call__ = apply


def star_hom_certify(images, source: AlgebraSpace, target: AlgebraSpace | None = None,
                     tol: float = DEFAULT_TOL, raise_on_failure: bool = True) -> StarHomomorphism:
    images = tuple(frozen(as_matrix(x, square=True)) for x in images)
    basis = source.basis
    if len(images) != len(basis):
        raise DimensionMismatch(f"{len(images)} images for a source basis of size {len(basis)}")
    if target is None:
        target = FullAlgebra(images[0].shape[0])
    if any(x.shape[0] != target.dim for x in images):
        raise DimensionMismatch("image sizes do not match the target")
    phi = StarHomomorphism(source, target, images)
    B = np.stack(basis)
    I = np.stack(images)
    prods = np.einsum("iab,jbc->ijac", B, B)
    lhs = phi.apply(prods)
    rhs = np.einsum("iab,jbc->ijac", I, I)
    mult = operator_norms(lhs - rhs)
    inv = operator_norms(phi.apply(adjoint(B)) - adjoint(I))
    result = StarHomomorphism(source, target, images, float(mult.max()), float(inv.max()))
    if raise_on_failure:
        if mult.max() > tol:
            frob = np.linalg.norm(lhs - rhs, axis=(-2, -1))
            i, j = _worst_pair(mult, frob)
            raise NotMultiplicative(f"phi(ab) != phi(a)phi(b): residual {mult.max():.3e} at basis pair ({i}, {j})",
                                    witness=(i, j), residual=float(mult.max()))
        if inv.max() > tol:
            i = int(np.argmax(inv))
            raise NotInvolutive(f"phi(a*) != phi(a)*: residual {inv.max():.3e} at basis element {i}",
                                witness=(i,), residual=float(inv.max()))
    return result


def rb_hom_defect(phi: StarHomomorphism, P1: RotaBaxterOperator, P2: RotaBaxterOperator) -> float:
    """max over the source basis of |phi(P1(a)) - P2(phi(a))|."""
    if abs(complex(P1.weight) - complex(P2.weight)) > 1e-12:
        raise WeightMismatch(f"weights differ: {P1.weight} vs {P2.weight}")
    B = np.stack(phi.source.basis)
    return float(np.max(operator_norms(phi.apply(P1.apply(B)) - P2.apply(np.stack(phi.images)))))


@dataclass(frozen=True, eq=False)
class RBRepresentation:
    """{pi, H, f}: pi intertwines P_source and P_target, and P_target
    matches f on pi(source)."""

    pi: StarHomomorphism
    f: np.ndarray
    P_source: RotaBaxterOperator
    P_target: RotaBaxterOperator
    certificates: dict = field(default_factory=dict)

    @property
    def source(self) -> AlgebraSpace:
        return self.pi.source

    @property
    def dim(self) -> int:
        return self.P_target.dim

    @property
    def weight(self) -> complex:
        return self.P_target.weight

    @property
    def passed(self) -> bool:
        return bool(self.certificates.get("passed"))


def certify_representation(pi: StarHomomorphism, f, P_source: RotaBaxterOperator,
                           P_target: RotaBaxterOperator, tol: float = DEFAULT_TOL,
                           raise_on_failure: bool = True) -> RBRepresentation:
    f = frozen(as_matrix(f, square=True))
    if f.shape[0] != P_target.dim:
        raise DimensionMismatch("f does not act on the target Hilbert space")
    inter = rb_hom_defect(pi, P_source, P_target)
    sweep = matching_sweep(P_target.op, P_target.weight, f, pi.images)
    certs = {
        "multiplicativity": pi.multiplicativity_defect,
        "involution": pi.involution_defect,
        "intertwining": inter,
        "matching": sweep.max_defect,
        "matching_witness": sweep.witness,
        "source_rb": P_source.certificate.max_residual,
        "target_rb": P_target.certificate.max_residual,
    }
    certs["passed"] = bool(
        max(pi.multiplicativity_defect, pi.involution_defect, inter, sweep.max_defect) <= tol
        and P_source.certificate.passed
        and P_target.certificate.passed
    )
    rep = RBRepresentation(pi, f, P_source, P_target, certs)
    if raise_on_failure and not rep.passed:
        raise CertificationFailed(f"not a Rota-Baxter *-representation: {certs}", certificate=certs)
    return rep


def _check_input(r: RBRepresentation, tol: float):
    if not r.passed:
        raise UncertifiedInput("input representation is not certified")
    if operator_norm(r.f - np.eye(r.dim)) > tol:
        raise UncertifiedInput("input representation must match the identity")


def build_direct_sum_representation(r1: RBRepresentation, r2: RBRepresentation,
                                    tol: float = DEFAULT_TOL) -> tuple[RBRepresentation, Projection]:
    """{pi1 + pi2, H1 + H2, p} with p the projection onto H1.

    Returns the representation together with p.
    """
    if abs(complex(r1.weight) - complex(r2.weight)) > 1e-12:
        raise WeightMismatch(f"weights differ: {r1.weight} vs {r2.weight}")
    if abs(complex(r1.weight) + 1) > 1e-12:
        raise WrongWeight("the direct-sum representation needs weight -1")
    _check_input(r1, tol)
    _check_input(r2, tol)
    n1, n2 = r1.dim, r2.dim
    p = Projection.coordinate(n1 + n2, n1)
    source = DirectSumAlgebra((r1.source, r2.source))
    target = FullAlgebra(n1 + n2)
    images = [target_embed(x, 0, n1, n2) for x in r1.pi.images] + [target_embed(x, 1, n1, n2) for x in r2.pi.images]
    pi = star_hom_certify(images, source, target, tol)
    P_source = direct_sum_rb(r1.P_source, r2.P_source, tol)
    P_target = psi_extend(direct_sum_rb(r1.P_target, r2.P_target, tol), p, tol)
    rep = certify_representation(pi, p.matrix, P_source, P_target, tol)
    rep.certificates["support"] = _support_violation(rep, p)
    return rep, p


def target_embed(x, k: int, n1: int, n2: int) -> np.ndarray:
    out = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    if k == 0:
        out[:n1, :n1] = x
    else:
        out[n1:, n1:] = x
    return out


def _support_violation(rep: RBRepresentation, p: Projection) -> float:
    src = rep.source
    q = p.complement().matrix
    worst = 0.0
    for k, proj in enumerate((p.matrix, q)):
        imgs = np.stack(rep.pi.images)[src.part_slices[k]]
        if len(imgs):
            worst = max(worst, float(np.max(operator_norms(imgs - proj @ imgs @ proj))))
    return worst


def split_representation(r: RBRepresentation, p: Projection,
                         tol: float = DEFAULT_TOL) -> tuple[RBRepresentation, RBRepresentation]:
    """Restrict a representation matching p of a two-part direct sum to its summands."""
    src = r.source
    if not isinstance(src, DirectSumAlgebra) or len(src.parts) != 2:
        raise DimensionMismatch("source must be a direct sum of two spaces")
    if operator_norm(r.f - p.matrix) > tol:
        raise UncertifiedInput("representation must match p")
    if not r.passed:
        raise UncertifiedInput("input representation is not certified")
    leak = _support_violation(r, p)
    if leak > tol:
        raise SupportViolation(f"pi(A_i) leaves B(H_i): off-block norm {leak:.3e}", residual=leak)
    out = []
    for k in (0, 1):
        part = src.parts[k]
        m = part.dim
        nk = p.rank if k == 0 else p.corank
        imgs = [_block(compress(x, p), k) for x in np.stack(r.pi.images)[src.part_slices[k]]]
        pi_k = star_hom_certify(imgs, part, FullAlgebra(nk), tol)

        def source_restricted(x, k=k):
            return src.component(k, r.P_source.apply(src.embed(k, x)))

        def target_restricted(x, k=k):
            b = np.zeros((p.dim, p.dim), dtype=complex)
            if k == 0:
                b[: p.rank, : p.rank] = x
            else:
                b[p.rank :, p.rank :] = x
            return _block(compress(r.P_target.apply(from_block_coordinates(b, p)), p), k)

        Ps = certify_rb(from_function(m, source_restricted), r.weight, part, tol)
        Pt = certify_rb(from_function(nk, target_restricted), r.weight, FullAlgebra(nk), tol)
        out.append(certify_representation(pi_k, np.eye(nk), Ps, Pt, tol))
    return out[0], out[1]


def _block(d, k):
    return np.array(d.a11 if k == 0 else d.a22)


@dataclass(frozen=True, eq=False)
class InvariantSubspaceResult:
    operator: RotaBaxterOperator
    symmetry_defects: list
    matching: CriterionResult

    @property
    def symmetric(self) -> bool:
        return max(self.symmetry_defects, default=0.0) <= self.operator.certificate.tol


def invariant_subspace_rb(images, p: Projection, tol: float = DEFAULT_TOL) -> InvariantSubspaceResult:
    """P(a) = p a p + p⊥ a p⊥ + p a p⊥ for a set of operators leaving pH invariant.

    Raises :class:`NotInvariant` naming the first image with p⊥ a p != 0.
    Symmetry on the span of the images is reported per image, not enforced.
    """
    if p.rank in (0, p.dim):
        raise ValueError("projection must be nontrivial")
    images = [as_matrix(x, square=True) for x in images]
    q = p.complement().matrix
    pm = p.matrix
    for idx, a in enumerate(images):
        leak = operator_norm(q @ a @ pm)
        if leak > tol:
            raise NotInvariant(f"image {idx} does not leave pH invariant: |p⊥ a p| = {leak:.3e}",
                               witness=(idx,), residual=leak)
    op = sandwich([(pm, pm), (q, q), (pm, q)])
    R = certify_rb(op, -1, FullAlgebra(p.dim), tol)
    crit = matching_matrix_criterion(op, p, R.space.basis, tol)
    return InvariantSubspaceResult(R, symmetry_defects(op, images), crit)
