"""Seeded families of Rota-Baxter operators used by the tests, the
acceptance suite and the CLI self-test."""

from __future__ import annotations

import numpy as np

from .constructions import (
    RealRBOperator,
    certify_real_rb,
    real_summation,
    self_adjoint_basis,
    triangular_rb,
)
from .core import DEFAULT_TOL, Projection, from_block_coordinates
from .rota_baxter import RotaBaxterOperator, certify_rb
from .sampling import complex_gaussian, random_projection, random_unitary
from .spaces import FullAlgebra, diagonal_algebra
from .superop import SuperOperator, conjugated, from_function, identity, left_mult, right_mult, zero


def random_rb_weight_minus_one(rng: np.random.Generator, k: int, depth: int = 1,
                               tol: float = DEFAULT_TOL) -> RotaBaxterOperator:
    """A random certified weight -1 operator on M_k.

    Drawn from left/right multiplication by random projections and the
    triangular construction over smaller blocks, optionally conjugated by a
    random unitary.  On M_1 the only such operators are 0 and id.
    """
    if k == 1:
        op = identity(1) if rng.integers(2) else zero(1)
        return certify_rb(op, -1, FullAlgebra(1), tol)
    kind = int(rng.integers(3 if depth > 0 else 2))
    if kind == 0:
        op = left_mult(random_projection(rng, k, int(rng.integers(0, k + 1))))
    elif kind == 1:
        op = right_mult(random_projection(rng, k, int(rng.integers(0, k + 1))))
    else:
        r = int(rng.integers(1, k))
        p = random_projection(rng, k, r)
        P1 = random_rb_weight_minus_one(rng, r, depth - 1, tol)
        P2 = random_rb_weight_minus_one(rng, k - r, depth - 1, tol)
        op = triangular_rb(P1, P2, p, tol).op
    if rng.integers(2):
        op = conjugated(op, random_unitary(rng, k))
    return certify_rb(op, -1, FullAlgebra(k), tol)


def random_triangular(rng, n: int, tol: float = DEFAULT_TOL):
    """(operator, projection, P1, P2) for a random triangular operator on M_n."""
    r = int(rng.integers(1, n))
    p = random_projection(rng, n, r)
    P1 = random_rb_weight_minus_one(rng, r, tol=tol)
    P2 = random_rb_weight_minus_one(rng, n - r, tol=tol)
    return triangular_rb(P1, P2, p, tol), p, P1, P2


def lower_block_injection(rng, P: SuperOperator, p: Projection, scale: float = 1.0) -> SuperOperator:
    """P plus a random linear map into the (2,1) block of p."""
    n, r, s = p.dim, p.rank, p.corank
    K = scale * complex_gaussian(rng, s * r, n * n)

    def perturbed(a):
        b = np.zeros((n, n), dtype=complex)
        b[r:, :r] = (K @ a.reshape(-1)).reshape(s, r)
        return P.apply(a) + from_block_coordinates(b, p)

    return from_function(n, perturbed)


def random_real_rb(rng, samples: int = 8, tol: float = DEFAULT_TOL) -> RealRBOperator:
    """A random real-linear Rota-Baxter operator on the real diagonal algebra.

    Coordinates are split into random groups; on each group one of: strict
    summation along a random order, its tilde (negated inclusive sum), zero,
    or -w id.  All pieces share the weight w, so the direct sum is again
    Rota-Baxter of weight w.
    """
    w = float(rng.choice([1.0 / samples, 0.5, -1.0, 2.0]))
    labels = rng.integers(0, 3, size=samples)
    R = np.zeros((samples, samples))
    for g in np.unique(labels):
        idx = np.flatnonzero(labels == g)
        order = idx[rng.permutation(len(idx))]
        kind = int(rng.integers(4))
        for pos, k in enumerate(order):
            before = order[:pos]
            if kind == 0:
                R[k, before] = w
            elif kind == 1:
                R[k, before] = -w
                R[k, k] = -w
            elif kind == 3:
                R[k, k] = -w
    space = diagonal_algebra(samples)
    return certify_real_rb(space, self_adjoint_basis(space), R, w, tol)


def real_operator_family(seed: int, count: int = 20, samples: int = 8) -> list[RealRBOperator]:
    """The real summation operator followed by ``count - 1`` random ones."""
    rng = np.random.default_rng(seed)
    return [real_summation(samples)] + [random_real_rb(rng, samples) for _ in range(count - 1)]


def random_representation(rng, k: int, tol: float = DEFAULT_TOL):
    """A certified representation of (M_k, P) matching the identity:
    pi(a) = u a u*, P_target = u P(u* . u) u*, f = id."""
    from .representations import certify_representation, star_hom_certify

    P = random_rb_weight_minus_one(rng, k, tol=tol)
    u = random_unitary(rng, k)
    source = FullAlgebra(k)
    pi = star_hom_certify([u @ a @ u.conj().T for a in source.basis], source, FullAlgebra(k), tol)
    Pt = certify_rb(conjugated(P.op, u), -1, FullAlgebra(k), tol)
    return certify_representation(pi, np.eye(k), P, Pt, tol)
