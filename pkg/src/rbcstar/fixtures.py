"""Passing, failing and malformed CLI inputs for every verb.

``write_cli_fixtures(directory)`` writes the files and returns, per verb, the
argument lists expected to exit with 0, 1 and 2.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import serialization as ser
from .core import matrix_unit
from .families import random_representation
from .quasidiagonal import banded_operator, truncated_shift
from .representations import build_direct_sum_representation


def _coord(dim, rank):
    return {"kind": "coordinate", "dim": dim, "rank": rank}


def _rep_doc(rep) -> dict:
    doc = ser.representation_to_json(rep)
    doc.pop("certificates")
    return doc


def _break_pi(doc: dict) -> dict:
    """Scale one image so pi stops being multiplicative."""
    bad = json.loads(json.dumps(doc))
    m = ser.matrix_from_json(bad["pi"][0])
    bad["pi"][0] = ser.matrix_to_json(2 * m + np.eye(m.shape[0]))
    return bad


def fixture_documents(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    r1 = random_representation(rng, 2)
    r2 = random_representation(rng, 1)
    built, p = build_direct_sum_representation(r1, r2)
    rep1, rep2 = _rep_doc(r1), _rep_doc(r2)
    unmatched = dict(rep1, f=ser.matrix_to_json(0.5 * np.eye(2)))
    split_doc = dict(_rep_doc(built), p=ser.projection_to_json(p))
    E = lambda i: ser.matrix_to_json(matrix_unit(4, i, i))  # noqa: E731
    chain = {"kind": "coordinate", "dim": 8, "ranks": list(range(1, 8))}
    return {
        "verify": (
            {"operator": {"kind": "left_mult", "p": _coord(2, 1)}, "weight": [-1, 0]},
            {"operator": {"kind": "identity", "dim": 2}, "weight": [0, 0]},
        ),
        "construct": (
            {"operator": {"kind": "triangular", "p": _coord(3, 1),
                          "p1": {"kind": "identity", "dim": 1},
                          "p2": {"kind": "left_mult", "p": _coord(2, 1)}}},
            {"operator": {"kind": "identity", "dim": 2}, "weight": [0, 0]},
        ),
        "correspond": (
            {"operator": {"kind": "left_mult", "p": _coord(3, 1)}, "p": _coord(3, 1)},
            {"operator": {"kind": "right_mult", "q": _coord(3, 1)}, "p": _coord(3, 1)},
        ),
        "decompose": (
            {"a1": [E(0), E(1)], "a2": [E(2), E(3)]},
            {"operator": {"kind": "left_mult", "p": _coord(2, 1)}, "weight": [-1, 0]},
        ),
        "volterra": ({}, {}),
        "rep-check": (rep1, unmatched),
        "rep-build": ({"r1": rep1, "r2": rep2}, {"r1": unmatched, "r2": rep2}),
        "rep-split": (split_doc, _break_pi(split_doc)),
        "quasidiag": (
            {"d": ser.matrix_to_json(banded_operator(8)), "chain": chain, "max_word_len": 3,
             "expect_verdict": "DecayObserved"},
            {"d": ser.matrix_to_json(truncated_shift(8)), "chain": chain, "max_word_len": 3,
             "expect_verdict": "DecayObserved"},
        ),
    }


EXTRA_ARGS = {
    "correspond": (["--direction", "phi"], ["--direction", "phi"]),
    "volterra": (["--samples", "8"], ["--samples", "8", "--weight", "0"]),
}


def write_cli_fixtures(directory, seed: int = 0) -> dict:
    """Write fixtures; return {verb: (pass_argv, fail_argv, malformed_argv)}."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = {}
    for verb, (good, bad) in fixture_documents(seed).items():
        paths = []
        for tag, doc in (("pass", good), ("fail", bad)):
            path = directory / f"{verb}-{tag}.json"
            path.write_text(json.dumps(doc, indent=1))
            paths.append(str(path))
        text = json.dumps(good, indent=1)
        broken = directory / f"{verb}-malformed.json"
        broken.write_text(text[: max(1, len(text) // 2)])
        extra_pass, extra_fail = EXTRA_ARGS.get(verb, ([], []))
        out[verb] = (
            [verb, paths[0], *extra_pass],
            [verb, paths[1], *extra_fail],
            [verb, str(broken), *extra_pass],
        )
    return out
