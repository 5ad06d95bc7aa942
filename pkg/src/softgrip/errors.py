"""Exception hierarchy shared by all softgrip modules."""


class SoftgripError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SoftgripError):
    """A configuration file is missing, unreadable, or structurally wrong."""


class DomainError(SoftgripError):
    """The kinematic chain was evaluated outside its mathematical domain
    (e.g. base length exceeding twice the leg length)."""


class OutOfRangeError(SoftgripError):
    """A requested target lies outside the achievable window."""


class InvalidRangeError(SoftgripError):
    """A trajectory request is degenerate (zero span or non-positive step)."""


class ParseError(SoftgripError):
    """Malformed input data.  Carries the 1-based line and column (field
    index) of the first offending record when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{message} ({loc})"
        super().__init__(message)
        self.line = line
        self.column = column


class InvalidPoseError(SoftgripError):
    """A rigid-transform matrix fails its orthonormality/shape invariants."""


class FrameMismatchError(SoftgripError):
    """Point clouds from different frames were combined without transforming."""


class EmptyCloudError(SoftgripError):
    """An operation that needs points received none (possibly after cropping
    or trimming)."""


class InvariantViolationError(SoftgripError):
    """Loaded data violates a model invariant (capacity table ordering,
    perturbation caps, ...)."""


class MissingCapacityDataError(SoftgripError):
    """No capacity entry covers the requested (diameter, approach, hinge)
    combination."""


class ObjectTooLargeError(SoftgripError):
    """Object exceeds the gripper's aperture or the planner's class bounds."""


class ObjectTooSmallError(SoftgripError):
    """Object is below the envelope planner's large-object class; route to
    the pinch planner."""


class SurfaceConflictError(SoftgripError):
    """A pinch plan would require the fingertips to reach past the support
    surface."""


class InsufficientDataError(SoftgripError):
    """Not enough trace records to evaluate a feedback decision."""
