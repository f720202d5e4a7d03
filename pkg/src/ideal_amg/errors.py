"""Exception hierarchy.

Every exception carries an ``exit_code`` used by the command-line driver:
2 for rejected input, 1 for internal/numerical failures.
"""


class IdealAMGError(Exception):
    exit_code = 1


class InputError(IdealAMGError, ValueError):
    """Input violates a precondition (exit code 2)."""

    exit_code = 2


class NotSpd(InputError):
    pass


class NotSymmetric(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ZeroVector(InputError):
    pass


class EmptySubspace(InputError):
    pass


class ConditionCViolated(InputError):
    """The (A, X, R, S, P) data do not satisfy the standing two-grid assumptions.

    ``which`` names the failed invariant, e.g. ``"RS = 0"``.
    """

    def __init__(self, which, detail=""):
        self.which = which
        msg = f"condition (C) violated: {which}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class EmptyCoarseSet(InputError):
    pass


class CoarseSetIsAll(InputError):
    pass


class SmootherNotAConvergent(InputError):
    pass


class MsNotSpd(InputError):
    pass


class NonPositiveEps(InputError):
    pass


class PartitionInvalid(InputError):
    pass


class SingularAcc(InputError):
    pass


class SingularSmoother(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class UnsupportedField(InputError):
    pass


class IoError(InputError, OSError):
    """A matrix or report file could not be read or written."""


class NoConvergence(IdealAMGError, ArithmeticError):
    pass


class InternalInconsistency(IdealAMGError, RuntimeError):
    """Independent tests that must agree did not (usually a tolerance problem)."""
