"""Command-line front end: JSON in, JSON report out.

Exit codes: 0 when every certificate in the report passes, 1 when one
fails (the report is still written), 2 for unreadable or malformed input.
Reports are byte-identical for identical configuration and input; pass
``--timing`` to add the (non-reproducible) wall-clock duration.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import serialization as ser
from .constructions import (
    block_diagonal_space,
    certify_real_rb,
    decompose_from_rb,
    phi_restrict,
    projection_rb_from_decomposition,
    psi_extend,
    real_restrict,
    self_adjoint_basis,
    symmetric_from_real,
    certify_decomposition,
    volterra_operator,
    volterra_probe_residual,
)
from .core import DEFAULT_TOL
from .errors import CertificationFailed, RBError
from .quasidiagonal import ProjectionChain, identity_residual, symmetry_profile
from .representations import (
    build_direct_sum_representation,
    certify_representation,
    split_representation,
    star_hom_certify,
)
from .rota_baxter import certify_rb, tilde
from .spaces import AlgebraSpace, DirectSumAlgebra, FullAlgebra, diagonal_algebra
from .superop import DiscreteVolterra, DirectSumOp, SuperOperator

VERBS = ("verify", "construct", "correspond", "decompose", "volterra",
         "rep-check", "rep-build", "rep-split", "quasidiag", "selftest")

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Raised for anything that should map to exit code 2."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


# --- input handling ----------------------------------------------------------


def load_input(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}:{e.lineno}:{e.colno}: {e.msg}", e.lineno, e.colno) from e
    if not isinstance(obj, dict):
        raise InputError(f"{path}: top-level JSON value must be an object")
    return obj


def _setting(args, doc: dict, name: str, default):
    """Command-line flag, else the input document, else the default."""
    v = getattr(args, name, None)
    if v is not None:
        return v
    return doc.get(name, default)


def resolve_config(args, doc: dict) -> dict:
    cfg = {
        "verb": args.verb,
        "input": args.input,
        "tol": float(_setting(args, doc, "tol", DEFAULT_TOL)),
        "seed": int(_setting(args, doc, "seed", 0)),
        "trials": int(_setting(args, doc, "trials", 200)),
        "mode": str(_setting(args, doc, "mode", "exhaustive")),
    }
    if cfg["tol"] <= 0:
        raise InputError("tol must be positive")
    if cfg["trials"] < 1:
        raise InputError("trials must be at least 1")
    if cfg["mode"] not in ("exhaustive", "random"):
        raise InputError(f"unknown mode {cfg['mode']!r}")
    for extra in ("direction", "samples", "weight_sweep", "weight", "filter"):
        v = getattr(args, extra, None)
        if v is not None and v is not False:
            cfg[extra] = v
    return cfg


def _need(doc: dict, key: str):
    if key not in doc:
        raise ser.SchemaError(f"input is missing {key!r}")
    return doc[key]


def default_space(op: SuperOperator) -> AlgebraSpace:
    """Natural domain of a structured operator: blocks for direct sums,
    diagonal algebra for Volterra, M_n otherwise."""
    s = op.structure
    if isinstance(s, DiscreteVolterra):
        return diagonal_algebra(op.dim)
    if isinstance(s, DirectSumOp):
        return DirectSumAlgebra(tuple(s.dims))
    return FullAlgebra(op.dim)


def _default_weight(op: SuperOperator) -> complex:
    if isinstance(op.structure, DiscreteVolterra):
        return 1.0 / op.dim
    return -1.0


def _read_operator(doc: dict, cfg: dict, key: str = "operator"):
    op_json = _need(doc, key)
    op = ser.operator_from_json(op_json, cfg["tol"])
    space = ser.space_from_json(doc["space"], cfg["tol"]) if "space" in doc else default_space(op)
    if space.dim != op.dim:
        raise InputError(f"space of dimension {space.dim} for an operator on M_{op.dim}")
    weight = ser.weight_from_json(doc["weight"]) if "weight" in doc else _default_weight(op)
    return op, space, weight


def _certify(op, weight, space, cfg):
    return certify_rb(op, weight, space, cfg["tol"], mode=cfg["mode"], trials=cfg["trials"],
                      seed=cfg["seed"], raise_on_failure=False)


def _failure(e: CertificationFailed) -> dict:
    out = {"error": type(e).__name__, "message": str(e)}
    if e.residual is not None:
        out["residual"] = float(e.residual)
    if e.witness is not None:
        out["witness"] = list(e.witness) if isinstance(e.witness, tuple) else e.witness
    return out


# --- verbs -------------------------------------------------------------------


def cmd_verify(doc, cfg):
    op, space, weight = _read_operator(doc, cfg)
    R = _certify(op, weight, space, cfg)
    res = ser.certificate_to_json(R.certificate)
    res["witness_probe"] = ser.witness_to_json(space, R.certificate)
    res["weight"] = ser.complex_to_json(weight)
    res["space"] = ser.space_to_json(space)
    return res, R.certificate.passed


def cmd_construct(doc, cfg):
    op_doc = doc if "operator" not in doc else doc["operator"]
    sub = dict(doc) if "operator" in doc else {"operator": op_doc}
    op, space, weight = _read_operator(sub, cfg)
    R = _certify(op, weight, space, cfg)
    if doc.get("tilde") and R.certificate.passed:
        R = tilde(R)
    out = ser.rb_operator_to_json(R)
    out["tilde"] = bool(doc.get("tilde", False))
    return out, R.certificate.passed


def _correspond_matching(doc, cfg, direction):
    tol = cfg["tol"]
    p = ser.projection_from_json(_need(doc, "p"), tol)
    op = ser.operator_from_json(_need(doc, "operator"), tol)
    if op.dim != p.dim:
        raise InputError(f"operator on M_{op.dim} with a projection on C^{p.dim}")
    weight = ser.weight_from_json(doc.get("weight", [-1.0, 0.0]))
    src_space = FullAlgebra(p.dim) if direction == "phi" else block_diagonal_space(p)
    R = _certify(op, weight, src_space, cfg)
    out = {"input_certificate": ser.certificate_to_json(R.certificate),
           "input_witness": ser.witness_to_json(src_space, R.certificate)}
    if not R.certificate.passed:
        return out, False
    try:
        res = phi_restrict(R, p, tol) if direction == "phi" else psi_extend(R, p, tol)
    except CertificationFailed as e:
        out["failure"] = _failure(e)
        if isinstance(e.witness, tuple) and len(e.witness) == 1:
            e_idx = e.witness[0]
        else:
            e_idx = e.witness
        if isinstance(e_idx, int):
            out["failure"]["witness_probe"] = ser.matrix_to_json(FullAlgebra(p.dim).basis[e_idx])
        return out, False
    out["result"] = ser.rb_operator_to_json(res)
    out["coordinates"] = "adapted to p" if direction == "phi" else "standard"
    if "matching_criterion" in res.notes:
        out["matching_criterion"] = res.notes["matching_criterion"]
    return out, res.certificate.passed


def _correspond_symmetric(doc, cfg, direction):
    tol = cfg["tol"]
    if direction == "phi":
        op, space, weight = _read_operator(doc, cfg)
        R = _certify(op, weight, space, cfg)
        out = {"input_certificate": ser.certificate_to_json(R.certificate)}
        if not R.certificate.passed:
            return out, False
        try:
            real = real_restrict(R, tol)
        except CertificationFailed as e:
            out["failure"] = _failure(e)
            return out, False
        out["real"] = {
            "matrix": ser.matrix_to_json(real.matrix),
            "weight": real.weight,
            "basis": [ser.matrix_to_json(s) for s in real.sa_basis],
            "certificate": ser.certificate_to_json(real.certificate),
        }
        return out, real.certificate.passed
    space = ser.space_from_json(_need(doc, "space"), tol)
    real_doc = _need(doc, "real")
    matrix = ser.matrix_from_json(_need(real_doc, "matrix"))
    if np.max(np.abs(matrix.imag), initial=0.0) > 0:
        raise InputError("real-linear operator matrix must have real entries")
    w = ser.weight_from_json(_need(real_doc, "weight"))
    sa = self_adjoint_basis(space)
    if matrix.shape != (len(sa), len(sa)):
        raise InputError(f"expected a {len(sa)}x{len(sa)} real matrix")
    real = certify_real_rb(space, sa, matrix.real, w.real, tol, raise_on_failure=False)
    out = {"input_certificate": ser.certificate_to_json(real.certificate)}
    if not real.certificate.passed:
        return out, False
    try:
        R = symmetric_from_real(real, tol)
    except CertificationFailed as e:
        out["failure"] = _failure(e)
        return out, False
    out["result"] = ser.rb_operator_to_json(R)
    out["symmetry_defect"] = R.notes["symmetry_defect"]
    return out, R.certificate.passed


def cmd_correspond(doc, cfg):
    direction = cfg.get("direction") or doc.get("direction")
    if direction not in ("phi", "psi"):
        raise InputError("correspond needs --direction phi|psi")
    cfg["direction"] = direction
    if doc.get("correspondence", "matching") == "symmetric":
        return _correspond_symmetric(doc, cfg, direction)
    return _correspond_matching(doc, cfg, direction)


def cmd_decompose(doc, cfg):
    tol = cfg["tol"]
    if "a1" in doc or "a2" in doc:
        a1 = [ser.matrix_from_json(x) for x in _need(doc, "a1")]
        a2 = [ser.matrix_from_json(x) for x in _need(doc, "a2")]
        pair = certify_decomposition(a1, a2, tol=tol)
        try:
            R = projection_rb_from_decomposition(pair, tol, seed=cfg["seed"])
        except CertificationFailed as e:
            return {"failure": _failure(e)}, False
        out = ser.rb_operator_to_json(R)
        out["idempotency_defect"] = R.notes["idempotency_defect"]
        out["symmetry_defect"] = R.notes["symmetry_defect"]
        out["norm_witness"] = R.notes["norm_witness"]
        return out, R.certificate.passed
    op, space, weight = _read_operator(doc, cfg)
    R = _certify(op, weight, space, cfg)
    out = {"input_certificate": ser.certificate_to_json(R.certificate)}
    if not R.certificate.passed:
        return out, False
    try:
        pair = decompose_from_rb(R, tol)
    except CertificationFailed as e:
        out["failure"] = _failure(e)
        return out, False
    out["a1"] = [ser.matrix_to_json(x) for x in pair.a1_basis]
    out["a2"] = [ser.matrix_to_json(x) for x in pair.a2_basis]
    out["residuals"] = pair.residuals
    return out, True


def cmd_volterra(doc, cfg):
    samples_in = doc.get("samples")
    values = None
    if isinstance(samples_in, list):
        values = np.array([ser.complex_from_json(v) for v in samples_in])
    m = cfg.get("samples") or (len(values) if values is not None else samples_in)
    if not isinstance(m, int) or m < 1:
        raise InputError("volterra needs --samples M (a positive integer)")
    if values is not None and len(values) != m:
        raise InputError(f"{len(values)} samples given but M = {m}")
    cfg["samples"] = m
    h = 1.0 / m
    weight = complex(cfg["weight"]) if "weight" in cfg else h
    op = volterra_operator(m)
    R = _certify(op, weight, diagonal_algebra(m), cfg)
    out = {
        "samples": m,
        "step": h,
        "weight": ser.complex_to_json(weight),
        "certificate": ser.certificate_to_json(R.certificate),
        "witness_probe": ser.witness_to_json(R.space, R.certificate),
    }
    if cfg.get("weight_sweep"):
        sweep = []
        for w in (0.0, h / 2, h, 2 * h):
            sweep.append({"weight": w, "probe_residual": volterra_probe_residual(m, w)})
        r1 = volterra_probe_residual(m, 0.0)
        r2 = volterra_probe_residual(2 * m, 0.0)
        out["weight_sweep"] = sweep
        out["probes"] = {"f": "x", "g": "x^2"}
        out["zero_weight_ratio"] = {"from": m, "to": 2 * m, "ratio": r2 / r1 if r1 else None}
    if values is not None:
        image = DiscreteVolterra(m).evaluate(np.diag(values))
        out["image"] = {"samples": [ser.complex_to_json(z) for z in np.diag(image)]}
    return out, R.certificate.passed


def rep_from_json(doc: dict, cfg: dict):
    """Parse and certify (without raising) a representation document."""
    tol = cfg["tol"]
    P_src = ser.operator_from_json(_need(doc, "P_source"), tol)
    P_tgt = ser.operator_from_json(_need(doc, "P_target"), tol)
    weight = ser.weight_from_json(_need(doc, "weight"))
    source = ser.space_from_json(doc["source"], tol) if "source" in doc else FullAlgebra(P_src.dim)
    if source.dim != P_src.dim:
        raise InputError("P_source does not act on the source space")
    images = [ser.matrix_from_json(x) for x in _need(doc, "pi")]
    if len(images) != source.size:
        raise InputError(f"pi lists {len(images)} images for a source basis of size {source.size}")
    if any(x.shape != (P_tgt.dim, P_tgt.dim) for x in images):
        raise InputError("pi images do not act on the target Hilbert space")
    f = ser.matrix_from_json(_need(doc, "f"))
    if f.shape != (P_tgt.dim, P_tgt.dim):
        raise InputError("f does not act on the target Hilbert space")
    pi = star_hom_certify(images, source, FullAlgebra(P_tgt.dim), tol, raise_on_failure=False)
    Rs = _certify(P_src, weight, source, cfg)
    Rt = _certify(P_tgt, weight, FullAlgebra(P_tgt.dim), cfg)
    return certify_representation(pi, f, Rs, Rt, tol, raise_on_failure=False)


def _rep_report(rep) -> dict:
    out = ser.representation_to_json(rep)
    out["source_certificate"] = ser.certificate_to_json(rep.P_source.certificate)
    out["target_certificate"] = ser.certificate_to_json(rep.P_target.certificate)
    return out


def cmd_rep_check(doc, cfg):
    rep = rep_from_json(doc, cfg)
    return {"certificates": _rep_report(rep)["certificates"],
            "source_certificate": ser.certificate_to_json(rep.P_source.certificate),
            "target_certificate": ser.certificate_to_json(rep.P_target.certificate)}, rep.passed


def cmd_rep_build(doc, cfg):
    r1 = rep_from_json(_need(doc, "r1"), cfg)
    r2 = rep_from_json(_need(doc, "r2"), cfg)
    out = {"inputs": [r1.certificates, r2.certificates]}
    if not (r1.passed and r2.passed):
        return out, False
    rep, p = build_direct_sum_representation(r1, r2, cfg["tol"])
    out["representation"] = _rep_report(rep)
    out["p"] = ser.projection_to_json(p)
    return out, rep.passed


def cmd_rep_split(doc, cfg):
    tol = cfg["tol"]
    p = ser.projection_from_json(_need(doc, "p"), tol)
    if "source" not in doc:
        raise ser.SchemaError("rep-split needs an explicit two-part direct-sum source")
    rep = rep_from_json(doc, cfg)
    out = {"input": rep.certificates}
    if not rep.passed:
        return out, False
    try:
        r1, r2 = split_representation(rep, p, tol)
    except CertificationFailed as e:
        out["failure"] = _failure(e)
        return out, False
    out["r1"] = _rep_report(r1)
    out["r2"] = _rep_report(r2)
    return out, r1.passed and r2.passed


def _chain_from_json(obj, tol) -> ProjectionChain:
    if isinstance(obj, dict) and obj.get("kind") == "coordinate":
        n = int(_need(obj, "dim"))
        ranks = _need(obj, "ranks")
        if any(not isinstance(r, int) or r < 0 or r > n for r in ranks):
            raise InputError(f"chain ranks must be integers in [0, {n}]")
        return ProjectionChain.coordinate(n, ranks, tol)
    projs = [ser.projection_from_json(x, tol) for x in _need(obj, "projections")]
    if not projs:
        raise InputError("chain is empty")
    return ProjectionChain(projs[0].dim, tuple(projs), tol)


def cmd_quasidiag(doc, cfg):
    tol = cfg["tol"]
    d = ser.matrix_from_json(_need(doc, "d"))
    chain = _chain_from_json(_need(doc, "chain"), tol)
    L = int(doc.get("max_word_len", 4))
    if L < 1:
        raise InputError("max_word_len must be positive")
    report = symmetry_profile(d, chain, L, tol)
    out = report.to_dict()
    ident = identity_residual(d, chain)
    out["identity_residual"] = ident
    passed = ident <= tol
    if "expect_verdict" in doc:
        out["expected_verdict"] = doc["expect_verdict"]
        passed = passed and doc["expect_verdict"] == report.verdict
    return out, passed


def cmd_selftest(doc, cfg, tol_override):
    from .acceptance import run_acceptance

    results = run_acceptance(tol_override=tol_override, only=cfg.get("filter"))
    return {"criteria": [r.to_dict() for r in results]}, all(r.passed for r in results)


HANDLERS = {
    "verify": cmd_verify,
    "construct": cmd_construct,
    "correspond": cmd_correspond,
    "decompose": cmd_decompose,
    "volterra": cmd_volterra,
    "rep-check": cmd_rep_check,
    "rep-build": cmd_rep_build,
    "rep-split": cmd_rep_split,
    "quasidiag": cmd_quasidiag,
}


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbcstar",
        description="Certify Rota-Baxter operators on finite-dimensional C*-algebras.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("input", help="input JSON file ('-' for stdin)")
        else:
            p.add_argument("input", nargs="?", default=None, help="optional input JSON file")
        p.add_argument("-o", "--output", default=None, help="report path (default: stdout)")
        p.add_argument("--tol", type=float, default=None, help="certification tolerance (default 1e-10)")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized probing (default 0)")
        p.add_argument("--trials", type=int, default=None, help="random probe pairs (default 200)")
        p.add_argument("--mode", choices=("exhaustive", "random"), default=None)
        p.add_argument("--timing", action="store_true",
                       help="add wall-clock duration to the report (breaks byte-identity)")
        return p

    common(sub.add_parser("verify", help="certify an operator against the Rota-Baxter identity"))
    common(sub.add_parser("construct", help="build and certify an operator from a JSON description"))
    p = common(sub.add_parser("correspond", help="matching or symmetric correspondence"))
    p.add_argument("--direction", choices=("phi", "psi"), default=None)
    common(sub.add_parser("decompose", help="subalgebra decompositions <-> idempotent operators"))
    p = common(sub.add_parser("volterra", help="discrete Volterra operator"), needs_input=False)
    p.add_argument("--samples", type=int, default=None, help="number of samples M")
    p.add_argument("--weight", type=float, default=None, help="weight to certify at (default 1/M)")
    p.add_argument("--weight-sweep", action="store_true", help="report probe residuals over weights")
    common(sub.add_parser("rep-check", help="certify a Rota-Baxter *-representation"))
    common(sub.add_parser("rep-build", help="direct sum of two representations"))
    common(sub.add_parser("rep-split", help="split a representation matching p"))
    common(sub.add_parser("quasidiag", help="commutator and symmetry profiles along a chain"))
    p = common(sub.add_parser("selftest", help="run the embedded acceptance suite"), needs_input=False)
    p.add_argument("--filter", default=None, help="run only criteria whose id or name contains this")
    return parser


def _write(report: dict, path: str | None):
    text = json.dumps(report, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    cfg = {"verb": args.verb, "input": args.input}
    try:
        doc = load_input(args.input)
        cfg = resolve_config(args, doc)
        if args.verb == "selftest":
            result, passed = cmd_selftest(doc, cfg, args.tol)
        else:
            result, passed = HANDLERS[args.verb](doc, cfg)
        code = EXIT_OK if passed else EXIT_FAILED
        report = {"config": cfg, "passed": bool(passed), "result": result}
    except InputError as e:
        print(f"rbcstar {args.verb}: {e}", file=sys.stderr)
        err = {"type": "InputError", "message": str(e)}
        if e.line is not None:
            err.update(line=e.line, column=e.column)
        report, code = {"config": cfg, "passed": False, "error": err}, EXIT_INPUT
    except CertificationFailed as e:
        report, code = {"config": cfg, "passed": False, "result": {"failure": _failure(e)}}, EXIT_FAILED
    except (RBError, KeyError, TypeError, ValueError) as e:
        print(f"rbcstar {args.verb}: {type(e).__name__}: {e}", file=sys.stderr)
        report = {"config": cfg, "passed": False, "error": {"type": type(e).__name__, "message": str(e)}}
        code = EXIT_INPUT
    if args.timing:
        report["duration_seconds"] = time.perf_counter() - start
    try:
        _write(report, args.output)
    except OSError as e:
        print(f"rbcstar: cannot write report: {e}", file=sys.stderr)
        return EXIT_INPUT
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
