"""Exception hierarchy shared by all detbound modules."""


class DetboundError(Exception):
    """Base class for every error raised by this package."""


class CapExceeded(DetboundError):
    """Vertex enumeration would exceed the configured size cap."""


class SizeExceeded(DetboundError):
    """A moment matrix would exceed the configured dimension cap."""


class DimensionMismatch(DetboundError):
    pass


class InvalidBaseRate(DetboundError):
    """Dividing counts by the base rate produced a probability above one."""


class InvalidBehavior(DetboundError):
    """The behavior admits no valid four-outcome distribution."""


class SolverFailure(DetboundError):
    """The LP/SDP backend did not return a usable optimum."""


class Unbounded(SolverFailure):
    pass


class NoThreshold(DetboundError):
    """No detection efficiency in [0, 1] makes the scaled value cross zero."""


class NotViolated(DetboundError):
    """The observed behavior violates no Bell inequality with bound zero."""


class NeverViolated(DetboundError):
    """Even perfect detectors cannot reach the required value under the model."""
