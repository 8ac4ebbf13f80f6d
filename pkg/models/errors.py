"""
Exception hierarchy for the spline workbench.

Every error carries the process exit code the CLI returns for it.
"""

from typing import Optional


class SplineError(ValueError):
    """Base class for all workbench errors."""

    exit_code: int = 1


class DomainError(SplineError):
    """An argument lies outside the domain of the operation."""

    exit_code = 7

    def __init__(self, message: str, value: Optional[float] = None, index: Optional[int] = None):
        super().__init__(message)
        self.value = value
        self.index = index


class ShapeError(SplineError):
    """Sequence lengths, margins or node counts do not fit together."""

    exit_code = 4


class RangeError(SplineError):
    """A value does not fit the fixed-point format."""

    exit_code = 5

    def __init__(self, message: str, value: float, index: Optional[int] = None):
        super().__init__(message)
        self.value = value
        self.index = index


class ParseError(SplineError):
    """Malformed input file or flag."""

    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateInputError(SplineError):
    """Interpolation nodes are not distinct."""

    exit_code = 8


class NumericError(SplineError):
    """A probe produced a non-finite value."""

    exit_code = 9

    def __init__(self, message: str, x: float):
        super().__init__(message)
        self.x = x


class SignalIOError(SplineError):
    """A file could not be read or written."""

    exit_code = 6
