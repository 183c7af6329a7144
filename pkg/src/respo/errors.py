"""Exception hierarchy shared by every stage of the pipeline.

The CLI maps :class:`ValidationError` to exit code 2 and
:class:`CapExceeded` to exit code 3.
"""

from __future__ import annotations


class RespoError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RespoError):
    """Input was malformed or violates a model invariant."""


class CapExceeded(RespoError):
    """A configured resource cap (states, actors) was hit."""


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" at {line}:{col}" if line is not None else ""
        super().__init__(f"{message}{where}")


class UndeclaredVariable(ParseError):
    pass


class CrossModuleAssignment(ParseError):
    pass


class DuplicateVariable(ParseError):
    pass


class DuplicateAssignment(ParseError):
    pass


class InitOutOfRange(ParseError):
    pass


class DivisionByZero(ValidationError, ZeroDivisionError):
    pass


class UpdateOutOfRange(ValidationError):
    pass


class StateSpaceExceeded(CapExceeded):
    pass


class TooManyActors(CapExceeded):
    pass


class InvalidCounterexample(ValidationError):
    pass


class NotARun(InvalidCounterexample):
    pass


class NotLoopFree(InvalidCounterexample):
    pass


class DoesNotEndInBad(InvalidCounterexample):
    pass


class UnknownState(InvalidCounterexample):
    pass


class SignatureError(ValidationError):
    pass


class UnknownVariable(ValidationError):
    pass


class NameClash(ValidationError):
    pass


class FormatError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")
