import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import cgauss, seeds, units
from rbcstar import serialization as ser
from rbcstar.core import Projection
from rbcstar.errors import NotAProjection
from rbcstar.rota_baxter import certify_rb
from rbcstar.spaces import DirectSumAlgebra, FullAlgebra, SpanAlgebra, diagonal_algebra
from rbcstar.superop import (
    DirectSumOp,
    DiscreteVolterra,
    ProjectionOntoSummand,
    Triangular,
    image_discrepancy,
    left_mult,
    right_mult,
)


def test_matrix_layout_is_row_major_pairs():
    a = np.array([[1 + 2j, 3], [4, 5 - 1j]])
    obj = ser.matrix_to_json(a)
    assert obj == {"rows": 2, "cols": 2, "data": [[1, 2], [3, 0], [4, 0], [5, -1]]}


@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_matrix_round_trip(seed, n, m):
    a = cgauss(np.random.default_rng(seed), n, m)
    obj = json.loads(json.dumps(ser.matrix_to_json(a)))
    assert np.array_equal(ser.matrix_from_json(obj), a)


@pytest.mark.parametrize("bad", [
    {"rows": 2, "cols": 2, "data": [[0, 0]] * 3},
    {"rows": 0, "cols": 1, "data": []},
    {"rows": 1, "cols": 1, "data": [[0, 0, 0]]},
    {"rows": 1, "cols": 1, "data": [["x", 0]]},
    {"rows": 1, "data": [[0, 0]]},
    [1, 2],
])
def test_matrix_schema_errors(bad):
    with pytest.raises(ser.SchemaError):
        ser.matrix_from_json(bad)


def test_complex_parsing():
    assert ser.complex_from_json([1, -2]) == 1 - 2j
    assert ser.complex_from_json(3) == 3
    with pytest.raises(ser.SchemaError):
        ser.complex_from_json(True)


def test_projection_forms():
    p = ser.projection_from_json({"kind": "coordinate", "dim": 3, "rank": 2})
    assert np.array_equal(p.matrix, np.diag([1, 1, 0]))
    q = ser.projection_from_json(ser.projection_to_json(p))
    assert np.array_equal(q.matrix, p.matrix)
    with pytest.raises(NotAProjection):
        ser.projection_from_json({"matrix": ser.matrix_to_json(2 * np.eye(2))})


def test_space_forms():
    assert isinstance(ser.space_from_json({"kind": "full", "dim": 2}), FullAlgebra)
    d = ser.space_from_json({"kind": "diagonal", "dim": 3})
    assert d.dim == 3 and d.size == 3
    ds = ser.space_from_json({"kind": "direct_sum", "parts": [1, {"kind": "full", "dim": 2}]})
    assert isinstance(ds, DirectSumAlgebra) and ds.dim == 3
    e = units(2)
    sp = ser.space_from_json({"kind": "span", "dim": 2, "generators": [ser.matrix_to_json(e[0])]})
    assert isinstance(sp, SpanAlgebra) and sp.size == 1
    for s in (d, ds, sp):
        again = ser.space_from_json(ser.space_to_json(s))
        assert again.dim == s.dim and again.size == s.size
    with pytest.raises(ser.SchemaError):
        ser.space_from_json({"kind": "banach"})


def coord(n, r):
    return {"kind": "coordinate", "dim": n, "rank": r}


def test_operator_kinds():
    L = ser.operator_from_json({"kind": "left_mult", "p": coord(2, 1)})
    assert image_discrepancy(L, left_mult(Projection.coordinate(2, 1))) == 0
    R = ser.operator_from_json({"kind": "right_mult", "q": coord(2, 1)})
    assert image_discrepancy(R, right_mult(Projection.coordinate(2, 1))) == 0
    T = ser.operator_from_json({"kind": "triangular", "p": coord(3, 1),
                                "p1": {"kind": "identity", "dim": 1}, "p2": {"kind": "zero", "dim": 2}})
    assert isinstance(T.structure, Triangular)
    D = ser.operator_from_json({"kind": "direct_sum", "parts": [{"kind": "identity", "dim": 1},
                                                                  {"kind": "zero", "dim": 2}]})
    assert isinstance(D.structure, DirectSumOp) and D.dim == 3
    V = ser.operator_from_json({"kind": "volterra", "samples": 4})
    assert isinstance(V.structure, DiscreteVolterra)
    e = [ser.matrix_to_json(x) for x in units(2)]
    P = ser.operator_from_json({"kind": "projection_onto", "a1": [e[0]], "a2": [e[3]]})
    assert isinstance(P.structure, ProjectionOntoSummand)
    with pytest.raises(ser.SchemaError):
        ser.operator_from_json({"kind": "projection_onto", "a1": [], "a2": []})
    with pytest.raises(ser.SchemaError):
        ser.operator_from_json({"kind": "mystery"})


def test_dense_operator_round_trip():
    op = ser.operator_from_json({"kind": "volterra", "samples": 3})
    back = ser.operator_from_json(json.loads(json.dumps(ser.operator_to_json(op))))
    assert np.array_equal(back.action, op.action)


def test_certificate_and_witness_serialization():
    from rbcstar.superop import identity

    R = certify_rb(identity(2), 0, FullAlgebra(2), raise_on_failure=False)
    out = ser.rb_operator_to_json(R)
    assert out["certificate"]["witness"] == [0, 0]
    assert out["witness"]["a"] == ser.matrix_to_json(units(2)[0])
    Rr = certify_rb(identity(2), 0, diagonal_algebra(2), mode="random", trials=5, seed=3,
                    raise_on_failure=False)
    w = ser.witness_to_json(Rr.space, Rr.certificate)
    assert "trial" in w and w["a"]["rows"] == 2
    json.dumps(out)
