"""Projection chains, commutator profiles and quasi-symmetric Rota-Baxter
sequences for single operators on C^n.

For a projection p the quasi-symmetric operator is

    P(a) = p a p + p⊥ a p⊥ + p a p⊥,

and P(d) - P(d*)* = -[d, p] holds entrywise, so symmetry defects along a
chain reproduce commutator norms exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_TOL,
    Projection,
    adjoint,
    as_matrix,
    cstar_words_with_letters,
    operator_norm,
)
from .errors import DimensionMismatch, NotAChain
from .rota_baxter import RotaBaxterOperator, certify_rb, matching_matrix_criterion
from .spaces import FullAlgebra
from .superop import sandwich

MONOTONE_SLACK = 1e-12
BLOCK_DIAGONAL = "BlockDiagonal"
DECAY_OBSERVED = "DecayObserved"
NO_DECAY = "NoDecay"


@dataclass(frozen=True, eq=False)
class ProjectionChain:
    """p_1 <= p_2 <= ... <= p_m, ordered via p_i p_j = p_min(i,j)."""

    dim: int
    projections: tuple
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        ps = tuple(self.projections)
        if not ps:
            raise NotAChain("chain is empty")
        for p in ps:
            if p.dim != self.dim:
                raise DimensionMismatch("chain projections of different sizes")
        for i, p in enumerate(ps):
            for q in ps[i + 1 :]:
                err = max(operator_norm(p.matrix @ q.matrix - p.matrix),
                          operator_norm(q.matrix @ p.matrix - p.matrix))
                if err > self.tol:
                    raise NotAChain(f"projections are not increasing (defect {err:.3e})")
        object.__setattr__(self, "projections", ps)

    @classmethod
    def coordinate(cls, dim: int, ranks, tol: float = DEFAULT_TOL) -> "ProjectionChain":
        return cls(dim, tuple(Projection.coordinate(dim, r, tol) for r in ranks), tol)

    @property
    def ranks(self) -> list[int]:
        return [p.rank for p in self.projections]

    def __len__(self):
        return len(self.projections)

    def __iter__(self):
        return iter(self.projections)


def _check(d, p_dim):
    d = as_matrix(d, square=True)
    if d.shape[0] != p_dim:
        raise DimensionMismatch(f"operator of size {d.shape[0]} vs projections on C^{p_dim}")
    return d


def commutator_norm(d, p: Projection) -> float:
    d = _check(d, p.dim)
    return operator_norm(d @ p.matrix - p.matrix @ d)


def quasi_symmetric_map(b: np.ndarray, p: Projection) -> np.ndarray:
    """p b p + p⊥ b p⊥ + p b p⊥ evaluated directly (no superoperator)."""
    pm = p.matrix
    q = np.eye(p.dim) - pm
    return pm @ b @ pm + q @ b @ q + pm @ b @ q


def quasi_symmetric_operator(p: Projection, tol: float = DEFAULT_TOL) -> RotaBaxterOperator:
    pm = p.matrix
    q = np.eye(p.dim) - pm
    op = sandwich([(pm, pm), (q, q), (pm, q)])
    R = certify_rb(op, -1, FullAlgebra(p.dim), tol)
    R.notes["matching_criterion"] = matching_matrix_criterion(op, p, R.space.basis, tol).worst
    return R


def quasi_symmetric_sequence(chain: ProjectionChain, tol: float | None = None) -> list[RotaBaxterOperator]:
    tol = chain.tol if tol is None else tol
    return [quasi_symmetric_operator(p, tol) for p in chain]


def symmetry_gap(b: np.ndarray, p: Projection) -> float:
    """|P(b) - P(b*)*| for the quasi-symmetric operator of p."""
    return operator_norm(quasi_symmetric_map(b, p) - adjoint(quasi_symmetric_map(adjoint(b), p)))


@dataclass
class QuasidiagonalReport:
    """Profiles of d along a finite chain.

    The verdict is a finite-truncation policy: BlockDiagonal when every
    commutator norm is within tol; DecayObserved when the profile is
    non-increasing and ends below half its first value; NoDecay otherwise.
    """

    ranks: list
    commutator_profile: list
    symmetry_profile: list
    word_commutator_profile: list
    verdict: str
    probe_words_len: int
    tol: float
    chain_reaches_identity: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ranks": self.ranks,
            "commutator_profile": self.commutator_profile,
            "symmetry_profile": self.symmetry_profile,
            "word_commutator_profile": self.word_commutator_profile,
            "verdict": self.verdict,
            "probe_words_len": self.probe_words_len,
            "tol": self.tol,
            "chain_reaches_identity": self.chain_reaches_identity,
            "verdict_policy": "finite-chain approximation of the limit definitions",
            "notes": self.notes,
        }


def classify(profile, tol: float = DEFAULT_TOL) -> str:
    profile = list(profile)
    if all(v <= tol for v in profile):
        return BLOCK_DIAGONAL
    monotone = all(b <= a + MONOTONE_SLACK for a, b in zip(profile, profile[1:]))
    if monotone and len(profile) > 1 and profile[-1] < profile[0] / 2:
        return DECAY_OBSERVED
    return NO_DECAY


def symmetry_profile(d, chain: ProjectionChain, max_word_len: int = 4,
                     tol: float | None = None) -> QuasidiagonalReport:
    """Commutator and symmetry-defect profiles of d along the chain.

    symmetry_profile[k] is the max over all words in d, d* of length up to
    ``max_word_len`` of |P_k(b) - P_k(b*)*|.
    """
    tol = chain.tol if tol is None else tol
    d = _check(d, chain.dim)
    words = [w for w, _ in cstar_words_with_letters(d, max_word_len)]
    comm, sym, wcomm = [], [], []
    for p in chain:
        comm.append(commutator_norm(d, p))
        sym.append(max(symmetry_gap(b, p) for b in words))
        wcomm.append(max(commutator_norm(b, p) for b in words))
    full = chain.projections[-1].rank == chain.dim
    notes = [] if full else ["final projection is not the identity; no limit claim is made"]
    return QuasidiagonalReport(chain.ranks, comm, sym, wcomm, classify(comm, tol),
                               max_word_len, tol, full, notes)


def symmetry_equals_commutator_check(d, chain: ProjectionChain) -> float:
    """max over the chain of | |P_n(d) - P_n(d*)*| - |[d, p_n]| |."""
    d = _check(d, chain.dim)
    return max(abs(symmetry_gap(d, p) - commutator_norm(d, p)) for p in chain)


def identity_residual(d, chain: ProjectionChain) -> float:
    """max entrywise |P_n(d) - P_n(d*)* + [d, p_n]| over the chain."""
    d = _check(d, chain.dim)
    worst = 0.0
    for p in chain:
        diff = quasi_symmetric_map(d, p) - adjoint(quasi_symmetric_map(adjoint(d), p))
        worst = max(worst, float(np.max(np.abs(diff + (d @ p.matrix - p.matrix @ d)))))
    return worst


def induction_bound_violation(d, chain: ProjectionChain, max_word_len: int = 4) -> float:
    """Largest excess of |p⊥ b p| over |p⊥ b1 p| |c| + |b1| |[c, p]| for
    words b = b1 c; nonpositive when the bound holds."""
    d = _check(d, chain.dim)
    letters = (d, adjoint(d))
    words = dict((combo, w) for w, combo in cstar_words_with_letters(d, max_word_len))
    worst = -np.inf
    for p in chain:
        pm = p.matrix
        q = np.eye(p.dim) - pm
        for combo, b in words.items():
            if len(combo) < 2:
                continue
            b1, c = words[combo[:-1]], letters[combo[-1]]
            lhs = operator_norm(q @ b @ pm)
            rhs = operator_norm(q @ b1 @ pm) * operator_norm(c) + operator_norm(b1) * commutator_norm(c, p)
            worst = max(worst, lhs - rhs)
    return float(worst)


def truncated_shift(n: int) -> np.ndarray:
    """S e_k = e_{k+1} on C^n (last basis vector sent to 0)."""
    return np.eye(n, k=-1, dtype=complex)


def banded_operator(n: int) -> np.ndarray:
    """Superdiagonal entries 2^-k at (k, k+1), rows counted from 1."""
    d = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        d[k - 1, k] = 2.0 ** (-k)
    return d
