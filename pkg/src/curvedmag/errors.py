"""Exception hierarchy shared by all modules."""


class CurvedMagError(Exception):
    """Base class for every error raised by the package."""


class ChartDomainError(CurvedMagError, ValueError):
    """Point lies outside the cylindrical chart of the model."""


class UnsupportedError(CurvedMagError, ValueError):
    """Operation is not defined for the requested model or shift plane."""


class EmbeddingViolationError(CurvedMagError, ValueError):
    """Ambient point does not satisfy the quadric of the model."""


class AxisSingularityError(CurvedMagError, ValueError):
    """A 1/sinh r (or 1/sin r) factor is needed on the symmetry axis."""


class DegenerateShiftError(CurvedMagError, ValueError):
    """Shift amount is zero where a nontrivial shift is required."""


class BranchSingularityError(CurvedMagError, ValueError):
    """Closed form has no one-sided limit at the requested point."""


class StepUnderflowError(CurvedMagError, RuntimeError):
    """Adaptive step size dropped below the configured minimum."""


class SingularityAbortError(CurvedMagError, RuntimeError):
    """Integration stopped near the axis or the chart boundary.

    The samples integrated so far are available as ``trajectory``.
    """

    def __init__(self, message, trajectory=None, reason=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.reason = reason


class InvalidLambdaError(CurvedMagError, ValueError):
    """Relativistic parameter outside the open interval (0, 1)."""


class RegimeMismatchError(CurvedMagError, ValueError):
    """Requested closed form does not apply to the given parameters."""


class BranchError(CurvedMagError, ValueError):
    """Branch continuation of a multivalued closed form failed."""


class InvalidRadiusError(CurvedMagError, ValueError):
    """No fixed-radius orbit exists at the requested radius."""


class InvalidParamsError(CurvedMagError, ValueError):
    """Parameter combination gives a negative radicand."""


class DomainError(CurvedMagError, ValueError):
    """Argument of an inverse function left its real domain."""


class InsufficientDataError(CurvedMagError, ValueError):
    """Not enough samples to fit the requested quantity."""
