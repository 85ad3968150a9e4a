"""2-Opt laboratory: exact moves, lower-bound gadgets, random models and oracles."""

from .engine import PivotKind, PivotRule, RunTrace, StepRecord, Termination, run
from .errors import (CapacityError, InvalidMoveError, LabError, ParseError, ScriptViolation,
                     UnsupportedFormatError)
from .geometry import (INF, Instance, Tour, TwoChange, apply_two_change, distance,
                       tour_length, two_change_delta)

__version__ = "0.1.0"

__all__ = [
    "INF", "Instance", "Tour", "TwoChange", "apply_two_change", "distance", "tour_length",
    "two_change_delta", "PivotKind", "PivotRule", "RunTrace", "StepRecord", "Termination", "run",
    "CapacityError", "InvalidMoveError", "LabError", "ParseError", "ScriptViolation",
    "UnsupportedFormatError",
]
