"""JSON wire formats.

Complex numbers are [re, im] pairs everywhere.  A matrix is
{"rows": n, "cols": m, "data": [[re, im], ...]} in row-major order.
"""

from __future__ import annotations

import numpy as np

from .core import DEFAULT_TOL, Projection, as_matrix
from .errors import RBError
from .spaces import AlgebraSpace, DirectSumAlgebra, FullAlgebra, SpanAlgebra, diagonal_algebra
from .superop import (
    DirectSumOp,
    DiscreteVolterra,
    ProjectionOntoSummand,
    SuperOperator,
    Triangular,
    from_structure,
    identity,
    left_mult,
    right_mult,
    zero,
)


class SchemaError(RBError):
    """Input does not follow the expected JSON layout."""


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing key {key!r}")
    return obj[key]


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        raise SchemaError(f"expected [re, im], got {v!r}")
    return complex(v[0], v[1])


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in a.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    rows, cols = _require(obj, "rows", "matrix"), _require(obj, "cols", "matrix")
    data = _require(obj, "data", "matrix")
    if not (isinstance(rows, int) and isinstance(cols, int) and rows > 0 and cols > 0):
        raise SchemaError("matrix: rows and cols must be positive integers")
    if not isinstance(data, list) or len(data) != rows * cols:
        raise SchemaError(f"matrix: expected {rows * cols} entries, got {len(data) if isinstance(data, list) else data!r}")
    try:
        return as_matrix(np.array([complex_from_json(v) for v in data]).reshape(rows, cols))
    except ValueError as e:
        raise SchemaError(f"matrix: {e}") from e


def projection_to_json(p: Projection) -> dict:
    return {"matrix": matrix_to_json(p.matrix)}


def projection_from_json(obj, tol: float = DEFAULT_TOL) -> Projection:
    if isinstance(obj, dict) and obj.get("kind") == "coordinate":
        return Projection.coordinate(int(_require(obj, "dim", "projection")), int(_require(obj, "rank", "projection")), tol)
    return Projection.from_matrix(matrix_from_json(_require(obj, "matrix", "projection")), tol)


def space_from_json(obj, tol: float = DEFAULT_TOL) -> AlgebraSpace:
    if isinstance(obj, int):
        return FullAlgebra(obj)
    kind = _require(obj, "kind", "space")
    if kind == "full":
        return FullAlgebra(int(_require(obj, "dim", "space")))
    if kind == "diagonal":
        return diagonal_algebra(int(_require(obj, "dim", "space")))
    if kind == "direct_sum":
        return DirectSumAlgebra(tuple(space_from_json(x, tol) for x in _require(obj, "parts", "space")))
    if kind == "span":
        gens = [matrix_from_json(g) for g in _require(obj, "generators", "space")]
        return SpanAlgebra(int(_require(obj, "dim", "space")), tuple(gens), tol)
    raise SchemaError(f"unknown space kind {kind!r}")


def space_to_json(space: AlgebraSpace) -> dict:
    return space.describe()


def operator_from_json(obj, tol: float = DEFAULT_TOL) -> SuperOperator:
    kind = _require(obj, "kind", "operator")
    if kind == "dense":
        n = int(_require(obj, "dim", "operator"))
        action = matrix_from_json(_require(obj, "action", "operator"))
        return SuperOperator(n, action)
    if kind == "identity":
        return identity(int(_require(obj, "dim", "operator")))
    if kind == "zero":
        return zero(int(_require(obj, "dim", "operator")))
    if kind == "left_mult":
        return left_mult(projection_from_json(_require(obj, "p", "operator"), tol))
    if kind == "right_mult":
        return right_mult(projection_from_json(_require(obj, "q", "operator"), tol))
    if kind == "triangular":
        p = projection_from_json(_require(obj, "p", "operator"), tol)
        p1 = operator_from_json(_require(obj, "p1", "operator"), tol)
        p2 = operator_from_json(_require(obj, "p2", "operator"), tol)
        return from_structure(p.dim, Triangular(p1, p2, p))
    if kind == "direct_sum":
        parts = tuple(operator_from_json(x, tol) for x in _require(obj, "parts", "operator"))
        dims = tuple(x.dim for x in parts)
        return from_structure(sum(dims), DirectSumOp(parts, dims))
    if kind == "volterra":
        m = int(_require(obj, "samples", "operator"))
        return from_structure(m, DiscreteVolterra(m))
    if kind == "projection_onto":
        a1 = tuple(matrix_from_json(x) for x in _require(obj, "a1", "operator"))
        a2 = tuple(matrix_from_json(x) for x in _require(obj, "a2", "operator"))
        if not a1 and not a2:
            raise SchemaError("projection_onto needs at least one basis element")
        n = (a1 + a2)[0].shape[0]
        return from_structure(n, ProjectionOntoSummand(a1, a2))
    raise SchemaError(f"unknown operator kind {kind!r}")


def operator_to_json(T: SuperOperator) -> dict:
    return {"kind": "dense", "dim": T.dim, "action": matrix_to_json(T.action)}


def weight_from_json(v) -> complex:
    return complex_from_json(v)


def certificate_to_json(cert) -> dict:
    return {
        "certified": bool(cert.passed),
        "max_residual": float(cert.max_residual),
        "invariance_residual": float(cert.invariance_residual),
        "probe_mode": cert.probe_mode,
        "pairs_checked": int(cert.pairs_checked),
        "trials": cert.trials,
        "seed": cert.seed,
        "tol": cert.tol,
        "witness": None if cert.witness is None else list(cert.witness),
    }


def witness_to_json(space: AlgebraSpace, cert) -> dict | None:
    """Basis indices plus the probe matrices themselves."""
    if cert.witness is None:
        return None
    if cert.probe_mode == "exhaustive":
        i, j = cert.witness
        return {"pair": [i, j], "a": matrix_to_json(space.basis[i]), "b": matrix_to_json(space.basis[j])}
    from .rota_baxter import random_pair_witness

    a, b = random_pair_witness(space, cert.witness[0], cert.seed)
    return {"trial": cert.witness[0], "a": matrix_to_json(a), "b": matrix_to_json(b)}


def rb_operator_to_json(R) -> dict:
    return {
        "operator": operator_to_json(R.op),
        "weight": complex_to_json(R.weight),
        "space": space_to_json(R.space),
        "certificate": certificate_to_json(R.certificate),
        "witness": witness_to_json(R.space, R.certificate),
    }


def representation_to_json(rep) -> dict:
    certs = {k: (list(v) if isinstance(v, tuple) else v) for k, v in rep.certificates.items()}
    return {
        "source": space_to_json(rep.source),
        "pi": [matrix_to_json(x) for x in rep.pi.images],
        "f": matrix_to_json(rep.f),
        "P_source": operator_to_json(rep.P_source.op),
        "P_target": operator_to_json(rep.P_target.op),
        "weight": complex_to_json(rep.weight),
        "certificates": certs,
    }
