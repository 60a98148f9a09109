"""Embedded acceptance suite, shared by ``rbcstar selftest`` and the tests.

Each criterion returns a :class:`CriterionOutcome`.  ``tol_override``
replaces every residual bound of every criterion (used to check that a
tolerance below machine precision makes the residual criteria fail);
bounds that are not residuals (the runtime budget, the Volterra ratio
window, the norm slack, exit codes) are never overridden.
"""

from __future__ import annotations

import contextlib
import io
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constructions import (
    block_diagonal_space,
    certify_decomposition,
    decompose_from_rb,
    direct_sum_rb,
    phi_restrict,
    principal_angles,
    projection_rb_from_decomposition,
    psi_extend,
    real_restrict,
    symmetric_from_real,
    volterra_discrete,
    volterra_probe_residual,
)
from .core import Projection, from_block_coordinates, matrix_unit, operator_norm
from .errors import NotMatching
from .families import (
    lower_block_injection,
    random_rb_weight_minus_one,
    random_representation,
    random_triangular,
    real_operator_family,
)
from .quasidiagonal import (
    BLOCK_DIAGONAL,
    DECAY_OBSERVED,
    NO_DECAY,
    ProjectionChain,
    banded_operator,
    symmetry_equals_commutator_check,
    symmetry_profile,
    truncated_shift,
)
from .representations import build_direct_sum_representation, rb_hom_defect, split_representation, star_hom_certify
from .rota_baxter import certify_rb, matching_matrix_criterion, matching_sweep, tilde
from .sampling import complex_gaussian, random_matrix, random_projection
from .spaces import FullAlgebra
from .superop import derivation_defect, identity, image_discrepancy, inner_derivation, left_mult


@dataclass
class CriterionOutcome:
    id: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "passed": bool(self.passed), "detail": self.detail}

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id:2d} {self.name}"


def _t(stated: float, override: float | None) -> float:
    return stated if override is None else override


def _f(x) -> float:
    return float(x)


# --- criteria ----------------------------------------------------------------


def left_mult_certification(tol=None):
    t = _t(1e-12, tol)
    start = time.perf_counter()
    worst, count, all_certified = 0.0, 0, True
    for n in (2, 3, 4):
        for r in range(n + 1):
            R = certify_rb(left_mult(Projection.coordinate(n, r)), -1, FullAlgebra(n), raise_on_failure=False)
            worst = max(worst, R.certificate.max_residual)
            all_certified &= R.certificate.passed
            count += 1
    within = time.perf_counter() - start < 5.0
    return worst <= t and all_certified and within, {
        "operators": count, "max_residual": worst, "bound": t, "within_runtime_budget_5s": within}


def tilde_closure(tol=None):
    t_cert, t_eq = _t(1e-12, tol), _t(1e-13, tol)
    worst_cert, worst_eq = 0.0, 0.0
    for n in (2, 3, 4):
        for r in range(n + 1):
            p = Projection.coordinate(n, r)
            R = certify_rb(left_mult(p), -1, FullAlgebra(n))
            T = tilde(R)
            worst_cert = max(worst_cert, T.certificate.max_residual)
            worst_eq = max(worst_eq, image_discrepancy(T.op, left_mult(p.complement())))
    return worst_cert <= t_cert and worst_eq <= t_eq, {
        "tilde_max_residual": worst_cert, "tilde_vs_complement": worst_eq, "bounds": [t_cert, t_eq]}


def matching_bijection(tol=None):
    t = _t(1e-12, tol)
    rng = np.random.default_rng(3)
    n = 5
    psi_phi, phi_psi, rejected, with_witness = 0.0, 0.0, 0, 0
    for _ in range(20):
        R, p, _, _ = random_triangular(rng, n)
        psi_phi = max(psi_phi, image_discrepancy(psi_extend(phi_restrict(R, p), p).op, R.op))
        r = p.rank
        Pp = direct_sum_rb(random_rb_weight_minus_one(rng, r), random_rb_weight_minus_one(rng, n - r))
        back = phi_restrict(psi_extend(Pp, p), p)
        phi_psi = max(phi_psi, image_discrepancy(back.op, Pp.op, block_diagonal_space(p).basis))
    for _ in range(20):
        R, p, _, _ = random_triangular(rng, n)
        bad = certify_rb(lower_block_injection(rng, R.op, p), -1, FullAlgebra(n), raise_on_failure=False)
        try:
            phi_restrict(bad, p)
        except NotMatching as e:
            rejected += 1
            with_witness += e.witness is not None
    ok = psi_phi <= t and phi_psi <= t and rejected == 20 and with_witness == 20
    return ok, {"psi_after_phi": psi_phi, "phi_after_psi": phi_psi, "bound": t,
                "perturbed_rejected": rejected, "rejections_with_witness": with_witness}


def matching_criterion_equivalence(tol=None):
    t = _t(1e-10, tol)
    rng = np.random.default_rng(4)
    disagreements, matching_seen, perturbed_seen = 0, 0, 0
    for case in range(100):
        n = int(rng.integers(2, 6))
        R, p, _, _ = random_triangular(rng, n)
        op = R.op if case < 50 else lower_block_injection(rng, R.op, p)
        basis = FullAlgebra(n).basis
        crit = matching_matrix_criterion(op, p, basis, t)
        sweep = matching_sweep(op, -1, p.matrix, basis)
        disagreements += crit.ok != (sweep.max_defect <= t)
        matching_seen += case < 50 and crit.ok
        perturbed_seen += case >= 50 and not crit.ok
    return disagreements == 0, {"cases": 100, "disagreements": disagreements, "bound": t,
                                "matching_recognized": int(matching_seen),
                                "perturbed_recognized": int(perturbed_seen)}


def symmetric_real_round_trip(tol=None):
    t_rt, t_sym = _t(1e-12, tol), _t(1e-13, tol)
    forward, backward, sym = 0.0, 0.0, 0.0
    fam = real_operator_family(seed=5, count=20, samples=8)
    for P1 in fam:
        R = symmetric_from_real(P1)
        sym = max(sym, R.notes["symmetry_defect"])
        forward = max(forward, _f(np.max(np.abs(real_restrict(R).matrix - P1.matrix))))
        again = symmetric_from_real(real_restrict(R))
        backward = max(backward, image_discrepancy(again.op, R.op, R.space.basis))
    return forward <= t_rt and backward <= t_rt and sym <= t_sym, {
        "operators": len(fam), "real_round_trip": forward, "symmetric_round_trip": backward,
        "symmetry_defect": sym, "bounds": [t_rt, t_sym]}


def decomposition_correspondence(tol=None):
    t_res, t_ang = _t(1e-10, tol), _t(1e-10, tol)
    a1 = [matrix_unit(4, 0, 0), matrix_unit(4, 1, 1)]
    a2 = [matrix_unit(4, 2, 2), matrix_unit(4, 3, 3)]
    R = projection_rb_from_decomposition(certify_decomposition(a1, a2, 4))
    back = decompose_from_rb(R)
    angles = max(_f(np.max(principal_angles(back.a1_basis, a1))), _f(np.max(principal_angles(back.a2_basis, a2))))
    notes = R.notes
    residual = max(R.certificate.max_residual, notes["idempotency_defect"], notes["symmetry_defect"])
    ok = residual <= t_res and notes["norm_witness"] <= 1 + 1e-8 and angles <= t_ang
    return ok, {"rb_residual": R.certificate.max_residual, "idempotency_defect": notes["idempotency_defect"],
                "symmetry_defect": notes["symmetry_defect"], "norm_witness": notes["norm_witness"],
                "max_principal_angle": angles, "bounds": [t_res, t_ang]}


def volterra(tol=None):
    t = _t(1e-13, tol)
    residuals = {}
    for m in (4, 8, 16, 32):
        residuals[str(m)] = volterra_discrete(m, tol=1.0).certificate.max_residual
    r64, r128 = volterra_probe_residual(64, 0.0), volterra_probe_residual(128, 0.0)
    ratio = r128 / r64
    ok = max(residuals.values()) <= t and 0.4 <= ratio <= 0.6
    return ok, {"exhaustive_residuals": residuals, "bound": t,
                "zero_weight_residual_64": r64, "zero_weight_residual_128": r128, "ratio": ratio}


def quasidiagonal_identity(tol=None):
    t = _t(1e-13, tol)
    rng = np.random.default_rng(8)
    chain8 = ProjectionChain.coordinate(8, range(1, 9))
    discrepancy = max(symmetry_equals_commutator_check(complex_gaussian(rng, 8, 8), chain8) for _ in range(50))

    shift = symmetry_profile(truncated_shift(64), ProjectionChain.coordinate(64, range(1, 64)), 2, t)
    shift_dev = max(abs(v - 1.0) for v in shift.commutator_profile)

    banded = symmetry_profile(banded_operator(16), ProjectionChain.coordinate(16, range(1, 16)), 2, t)
    banded_dev = max(abs(v * 2.0**r - 1.0) for r, v in zip(banded.ranks, banded.commutator_profile))

    blocks = [random_matrix(rng, k) for k in (2, 3, 3)]
    d = np.zeros((8, 8), dtype=complex)
    d[:2, :2], d[2:5, 2:5], d[5:, 5:] = blocks
    block = symmetry_profile(d, ProjectionChain.coordinate(8, (2, 5, 8)), 3, t)
    block_max = max(block.commutator_profile + block.symmetry_profile)

    ok = (discrepancy <= t and shift_dev <= t and shift.verdict == NO_DECAY
          and banded_dev <= t and banded.verdict == DECAY_OBSERVED
          and block.verdict == BLOCK_DIAGONAL and block_max <= t)
    return ok, {"random_discrepancy": discrepancy, "shift_deviation_from_1": shift_dev,
                "shift_verdict": shift.verdict, "banded_relative_deviation": banded_dev,
                "banded_verdict": banded.verdict, "block_max": block_max,
                "block_verdict": block.verdict, "bound": t}


def representation_round_trip(tol=None):
    t = _t(1e-12, tol)
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(10):
        k1, k2 = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        r1, r2 = random_representation(rng, k1), random_representation(rng, k2)
        rep, p = build_direct_sum_representation(r1, r2)
        s1, s2 = split_representation(rep, p)
        for orig, got in ((r1, s1), (r2, s2)):
            basis = orig.source.basis
            worst = max(worst,
                        max(operator_norm(a - b) for a, b in zip(orig.pi.images, got.pi.images)),
                        image_discrepancy(orig.P_source.op, got.P_source.op, basis),
                        image_discrepancy(orig.P_target.op, got.P_target.op))
    embed = 0.0
    for _ in range(10):
        n = int(rng.integers(2, 6))
        r = int(rng.integers(1, n))
        p = random_projection(rng, n, r)
        Pp = direct_sum_rb(random_rb_weight_minus_one(rng, r), random_rb_weight_minus_one(rng, n - r))
        space = block_diagonal_space(p)
        iota = star_hom_certify([from_block_coordinates(x, p) for x in space.basis], space, FullAlgebra(n))
        embed = max(embed, rb_hom_defect(iota, Pp, psi_extend(Pp, p)))
    return worst <= t and embed <= t, {"round_trip": worst, "embedding_defect": embed, "bound": t}


def derivation_oracle(tol=None):
    t = _t(1e-12, tol)
    rng = np.random.default_rng(10)
    worst = 0.0
    for case in range(100):
        n = (2, 3, 4)[case % 3]
        D = inner_derivation(random_matrix(rng, n))
        worst = max(worst, derivation_defect(D, random_matrix(rng, n), random_matrix(rng, n)))
    identity_defects = []
    for n in (2, 3, 4):
        a = random_matrix(rng, n)
        a = a / operator_norm(a)
        identity_defects.append(derivation_defect(identity(n), np.eye(n), a))
        identity_defects.append(derivation_defect(identity(n), np.eye(n), np.eye(n)))
    ok = worst <= t and min(identity_defects) >= 0.9
    return ok, {"inner_max_defect": worst, "bound": t, "identity_min_defect": min(identity_defects)}


def cli_contract(tol=None):
    from .cli import run
    from .fixtures import write_cli_fixtures

    bad_codes, nondeterministic = [], []
    with tempfile.TemporaryDirectory() as tmp:
        fixtures = write_cli_fixtures(Path(tmp) / "in")
        for verb, cases in fixtures.items():
            for expected, argv in zip((0, 1, 2), cases):
                outputs = []
                for k in range(2):
                    out = Path(tmp) / f"{verb}-{expected}-{k}.json"
                    with contextlib.redirect_stderr(io.StringIO()):
                        code = run([*argv, "-o", str(out)])
                    outputs.append(out.read_bytes())
                    if code != expected:
                        bad_codes.append(f"{verb}: expected {expected}, got {code}")
                if outputs[0] != outputs[1]:
                    nondeterministic.append(f"{verb}/{expected}")
    return not bad_codes and not nondeterministic, {
        "verbs": sorted(fixtures), "exit_code_mismatches": sorted(set(bad_codes)),
        "nondeterministic": nondeterministic}


CRITERIA = [
    (1, "left-multiplication exhaustive certification", left_mult_certification),
    (2, "tilde closure", tilde_closure),
    (3, "matching correspondence bijection", matching_bijection),
    (4, "block matching criterion equivalence", matching_criterion_equivalence),
    (5, "symmetric/real-linear round trip", symmetric_real_round_trip),
    (6, "idempotent operators and decompositions", decomposition_correspondence),
    (7, "discrete volterra", volterra),
    (8, "quasidiagonal symmetry/commutator identity", quasidiagonal_identity),
    (9, "representation direct-sum round trip", representation_round_trip),
    (10, "derivation oracle", derivation_oracle),
    (11, "cli determinism and exit codes", cli_contract),
]


def run_criterion(cid: int, name: str, fn, tol_override=None) -> CriterionOutcome:
    try:
        passed, detail = fn(tol_override)
    except Exception as e:  # a crash is an honest failure, not a suite abort
        passed, detail = False, {"exception": type(e).__name__, "message": str(e)}
    return CriterionOutcome(cid, name, bool(passed), detail)


def run_acceptance(tol_override: float | None = None, only: str | None = None) -> list[CriterionOutcome]:
    """Run all criteria, or those whose id or name contains ``only``."""
    selected = [
        c for c in CRITERIA
        if only is None or only.lower() in c[1].lower() or only == str(c[0])
    ]
    return [run_criterion(cid, name, fn, tol_override) for cid, name, fn in selected]
