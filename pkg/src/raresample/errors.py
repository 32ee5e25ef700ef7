"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for invalid input, 3 for numerical failure.
"""


class RareSampleError(Exception):
    exit_code = 3


class InputError(RareSampleError, ValueError):
    exit_code = 2


class NumericalError(RareSampleError, ArithmeticError):
    exit_code = 3


class InvalidModel(InputError):
    """Raised when a model violates one or more generator invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid model: {lines}")


class ModelFormatError(InputError):
    pass


class UnknownSymbol(InputError):
    pass


class ForbiddenWord(InputError):
    pass


class NotUnifilar(InputError):
    pass


class BetaZero(InputError):
    pass


class MarkovOrderMismatch(InputError):
    pass


class NotDensityMatrix(InputError):
    pass


class InsufficientData(InputError):
    pass


class NonConvergence(NumericalError):
    pass


class TiltOverflow(NumericalError, OverflowError):
    pass


class LinearlyDependentStates(NumericalError):
    pass


class FixedPointViolation(NumericalError):
    pass
