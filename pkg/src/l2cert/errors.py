"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class L2CertError(Exception):
    """Base class for every error raised by this package."""


class WordSyntaxError(L2CertError, ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}" + (f" in {text!r}" if text else ""))
        self.position = position
        self.text = text


class AlphabetMismatch(L2CertError, ValueError):
    pass


class OracleMismatch(L2CertError, ValueError):
    pass


class InvalidTable(L2CertError, ValueError):
    pass


class CapabilityMissing(L2CertError):
    """The oracle lacks an optional capability required by the caller."""


class FuelExhausted(L2CertError):
    """A bounded search ran out of fuel before reaching an answer.

    This is an *undecided* outcome, never a negative answer.
    """


class QuotientCapExhausted(FuelExhausted):
    """No suitable finite quotient was found below the search cap.

    This does not mean that none exists.
    """


class BudgetExceeded(L2CertError):
    """An iteration or memory budget was exhausted.

    ``partial`` carries whatever certified partial result was available.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class MemoryBudgetExceeded(BudgetExceeded):
    pass


class MonotonicityViolation(L2CertError, ArithmeticError):
    """A stream declared monotone emitted a pair in the wrong order."""


class ComplexError(L2CertError, ValueError):
    pass


class InputFileError(L2CertError, ValueError):
    """A group, matrix, complex or table file failed to parse."""

    def __init__(self, message: str, path: str = "<string>", line: int = 0):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
