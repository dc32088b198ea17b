"""Exception types shared across the package."""


class SoftQEDError(Exception):
    """Base class; ``payload`` carries structured data for reports."""

    def __init__(self, message, **payload):
        super().__init__(message)
        self.payload = payload


class ContextError(SoftQEDError):
    pass


class DiracIndexError(SoftQEDError):
    pass


class StateError(SoftQEDError):
    pass


class ShapeError(SoftQEDError):
    pass


class StructuralError(SoftQEDError):
    pass


class ConventionError(SoftQEDError):
    pass


class AssumptionError(SoftQEDError):
    """Raised when a result would depend on the contour-distortion assumption."""


class PoleHit(SoftQEDError):
    """A denominator vanished exactly at an evaluation point."""


class QuadratureError(SoftQEDError):
    pass


class GraphError(SoftQEDError):
    """An insertion graph violates a structural invariant."""

    def __init__(self, message, invariant, **payload):
        super().__init__(message, invariant=invariant, **payload)
        self.invariant = invariant


class ReroutingError(SoftQEDError):
    pass


class InfraredDivergence(SoftQEDError):
    pass
