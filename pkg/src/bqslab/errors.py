"""Exception types shared by every module.

InputError covers malformed shapes and files, NumericalError covers an
assumed identity failing beyond tolerance, and HypothesisError covers a
mathematical precondition that the data does not satisfy.
"""


class InputError(ValueError):
    """Shapes or parameters inconsistent with the product system."""


class NumericalError(ArithmeticError):
    """An identity that should hold by construction failed beyond tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class HypothesisError(ValueError):
    """A mathematical precondition (QS, invariance, purity, ...) does not hold."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotQuotientError(HypothesisError):
    pass


class NotInvariantError(HypothesisError):
    pass


class BrehmerError(HypothesisError):
    pass


class NotPureError(HypothesisError):
    pass


class RangeInclusionError(HypothesisError):
    pass


class NotDoublyCommutingError(HypothesisError):
    pass


__all__ = [
    "InputError",
    "NumericalError",
    "HypothesisError",
    "NotQuotientError",
    "NotInvariantError",
    "BrehmerError",
    "NotPureError",
    "RangeInclusionError",
    "NotDoublyCommutingError",
]
