"""Exception types for curve validation and numeric-procedure failures."""


class CurveError(ValueError):
    """Base class for construction/validation failures (CLI exit code 2)."""


class TooFewVertices(CurveError):
    pass


class DegenerateSegment(CurveError):
    pass


class SelfIntersection(CurveError):
    pass


class OutOfRange(CurveError):
    pass


class NoTangents(CurveError):
    pass


class ComponentMismatch(CurveError):
    pass


class NonpositiveThickness(CurveError):
    pass


class InvalidDims(CurveError):
    pass


class ZeroThicknessStart(CurveError):
    pass


class BoundaryPoint(CurveError):
    pass


class DomainTooSmall(CurveError):
    pass


class NumericFailure(RuntimeError):
    """Base class for numeric-procedure failures (CLI exit code 3)."""


class BracketMiss(NumericFailure):
    """Bisection predicate is constant on the supplied bracket."""


class LadderExhausted(NumericFailure):
    """Smoothing ladder could not meet its targets.

    Carries the achieved values so callers can report what was reached.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = dict(achieved or {})
