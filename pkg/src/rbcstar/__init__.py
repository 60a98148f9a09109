"""Rota-Baxter operators on finite-dimensional C*-algebras: exact
certification, the classical constructions, the correspondences between
them, representations, and commutator profiles of single operators."""

from .core import DEFAULT_TOL, BlockDecomposition, Projection, adjoint, assemble, compress, operator_norm
from .errors import CertificationFailed, RBError
from .rota_baxter import Certificate, RotaBaxterOperator, certify_rb, rb_residual, tilde
from .spaces import DirectSumAlgebra, FullAlgebra, SpanAlgebra, diagonal_algebra
from .superop import SuperOperator, compose, derivation_defect, invert, superop_norm

__all__ = [
    "DEFAULT_TOL",
    "BlockDecomposition",
    "Certificate",
    "CertificationFailed",
    "DirectSumAlgebra",
    "FullAlgebra",
    "Projection",
    "RBError",
    "RotaBaxterOperator",
    "SpanAlgebra",
    "SuperOperator",
    "adjoint",
    "assemble",
    "certify_rb",
    "compose",
    "compress",
    "derivation_defect",
    "diagonal_algebra",
    "invert",
    "operator_norm",
    "rb_residual",
    "superop_norm",
    "tilde",
]

__version__ = "0.1.0"
