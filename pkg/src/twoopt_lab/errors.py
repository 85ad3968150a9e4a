"""Exception types raised across the package."""


class LabError(Exception):
    """Base class for errors raised by twoopt_lab."""


class InvalidMoveError(LabError, ValueError):
    """A 2-change that cannot be applied to the given tour.

    ``reason`` is ``"edge-not-in-tour"`` or ``"shared-vertex"``.
    """

    def __init__(self, message, reason):
        super().__init__(message)
        self.reason = reason


class CapacityError(LabError):
    """The instance is too large for an exact (exponential-time) routine."""


class ScriptViolation(LabError):
    """A scripted move was not applicable or not strictly improving."""

    def __init__(self, message, step_index, delta=None):
        super().__init__(message)
        self.step_index = step_index
        self.delta = delta


class ParseError(LabError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedFormatError(ParseError):
    pass
