"""Exception types shared across the library."""


class SepadError(Exception):
    """Base class for all library errors."""


class DomainError(SepadError):
    """An argument lies outside the mathematical domain of the operation."""


class NonConvergence(SepadError):
    """A series or iterative evaluation failed to reach the requested tolerance."""


class QuadratureFailure(SepadError):
    """Adaptive quadrature exhausted its refinement budget."""


class BoundarySingularity(SepadError):
    """A boundary term required by a fractional-derivative formula is infinite."""


class DifferentiationDepthExceeded(SepadError):
    """A symbolic derivative of higher order than the configured cap was requested."""
