"""Exceptions raised by MotionCast.

All of them derive from ValueError so callers that only guard against invalid inputs keep working.
"""


class MotionCastError(ValueError):
    """Base class of all MotionCast errors."""


class DegenerateShapeError(MotionCastError):
    """A shape has a zero-length edge, a zero-area cell or violates its sampling invariants."""


class UnsupportedTopologyError(MotionCastError):
    """The operation is not defined for the shape's topology."""


class IncompatibleShapesError(MotionCastError):
    """Two shapes (or frames, or paths) cannot be compared point by point."""


class DegenerateMetricError(MotionCastError):
    """The metric configuration yields a zero effective weight."""


class UnknownRegionError(MotionCastError):
    """A requested region tag does not occur on the shape."""


class EmptyLibraryError(MotionCastError):
    """A primitive library without entries was passed where at least one entry is needed."""


class ProtocolError(MotionCastError):
    """The evaluation protocol cannot be run on the given library."""


class UnknownMotionClassError(MotionCastError):
    """A generator spec names a motion class that has no generator."""
