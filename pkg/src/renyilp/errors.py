"""Exception hierarchy shared by every module of the package."""


class RenyiLpError(ValueError):
    """Base class for all domain errors raised by this package."""


class NotHermitian(RenyiLpError):
    pass


class NotPSD(RenyiLpError):
    pass


class ZeroOperator(RenyiLpError):
    pass


class InvalidExponent(RenyiLpError):
    pass


class StructureMismatch(RenyiLpError):
    pass


class ShapeMismatch(RenyiLpError):
    pass


class NotInSpace(RenyiLpError):
    """The element is not compressed to the support of the reference functional."""


class ExponentMismatch(RenyiLpError):
    pass


class ZeroElement(RenyiLpError):
    pass


class OutOfStrip(RenyiLpError):
    pass


class InvalidEta(RenyiLpError):
    pass


class InvalidAlpha(RenyiLpError):
    pass


class ZeroFunctional(RenyiLpError):
    pass


class InvalidWeight(RenyiLpError):
    pass


class PositivityClassTooWeak(RenyiLpError):
    pass


class HypothesisNotMet(RenyiLpError):
    pass


class ParseError(RenyiLpError):
    pass


class ConsistencyError(RenyiLpError):
    """Two independent computations of the same quantity disagree."""
