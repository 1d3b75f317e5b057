"""Exception types shared across the package."""


class ThinLayerError(Exception):
    """Base class for all package errors."""


class DomainError(ThinLayerError):
    """A point or parameter lies outside the operation's domain of validity."""


class GeometryError(ThinLayerError):
    """Invalid boundary curve (self-intersection, degenerate data)."""


class ConvergenceError(ThinLayerError):
    """An iterative procedure failed to reach its tolerance."""


class CompatibilityError(ThinLayerError):
    """A zero-mean (solvability) condition is violated.

    Carries the offending mean value so callers can see how badly the
    condition failed and at which stage.
    """

    def __init__(self, message, mean=None):
        if mean is not None:
            message = f"{message} (mean = {mean})"
        super().__init__(message)
        self.mean = mean


class ParameterError(ThinLayerError):
    """A contrast parameter violates its admissibility hypothesis."""


class ResolutionError(ThinLayerError):
    """A sampling grid is too coarse for the requested operation."""


class UsageError(ThinLayerError):
    """Mismatched objects passed together (wrong curve, data or contrast)."""
