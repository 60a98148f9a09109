"""Exception hierarchy for rbcstar."""


class RBError(ValueError):
    """Base class for all errors raised by rbcstar."""


class DimensionMismatch(RBError):
    pass


class NotAProjection(RBError):
    pass


class NotAChain(RBError):
    pass


class NotASubalgebra(RBError):
    pass


class NotInvertible(RBError):
    pass


class CertificationFailed(RBError):
    """An identity failed on some probe pair.

    ``witness`` holds the offending probe (a pair of basis indices, or the
    probe matrices for randomized runs) and ``residual`` its residual.
    """

    def __init__(self, message, witness=None, residual=None, certificate=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual
        self.certificate = certificate


class NotMatching(CertificationFailed):
    pass


class WeightMismatch(RBError):
    pass


class WrongWeight(RBError):
    pass


class NonRealWeight(RBError):
    pass


class NotSymmetric(CertificationFailed):
    pass


class NotCommutative(RBError):
    pass


class NotIdempotent(CertificationFailed):
    pass


class NotDirectSum(RBError):
    pass


NotSubalgebra = NotASubalgebra


class NotMultiplicative(CertificationFailed):
    pass


class NotInvolutive(CertificationFailed):
    pass


class SupportViolation(CertificationFailed):
    pass


class NotInvariant(CertificationFailed):
    pass


class UncertifiedInput(RBError):
    pass
