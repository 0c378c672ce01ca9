"""Exception types shared across the package."""


class StatembedError(Exception):
    """Base class for all package-specific failures."""


class ChartError(StatembedError, ValueError):
    """Invalid chart geometry (too few points, empty ranges, bad shapes)."""


class PathError(StatembedError, ValueError):
    """A lattice path leaves its chart."""


class NonFiniteError(StatembedError, ValueError):
    """A field operation produced NaN or Inf entries."""


class SingularMetricError(StatembedError, ValueError):
    """Metric not positive definite / not invertible at some grid point."""

    def __init__(self, message: str, point: tuple = ()):
        super().__init__(message)
        self.point = point


class InjectivityError(StatembedError, ValueError):
    """A map required to be injective folds over on the checked domain."""


class NotClosedError(StatembedError, ValueError):
    """A 1-form required to be closed has too large an exterior derivative."""


class IntegrabilityError(StatembedError, ValueError):
    """Integrability residuals exceed the gate for transport/embedding."""


class TransversalityError(StatembedError, ValueError):
    """Frame of an affine immersion is singular at some grid point."""

    def __init__(self, message: str, point: tuple = ()):
        super().__init__(message)
        self.point = point


class FrameConditionError(StatembedError, ValueError):
    """A frame field is too ill-conditioned to solve against."""
