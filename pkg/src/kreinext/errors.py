"""Exception types shared across the package."""


class NumericalFailure(RuntimeError):
    """A numerical routine could not reach its accuracy or solvability target."""


class AccuracyError(NumericalFailure):
    """Quadrature or iteration did not converge; carries the best estimate."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SingularConfigurationError(NumericalFailure):
    """A parameter point where the requested construction degenerates.

    Raised e.g. when a boundary condition is not expressible in coupling-matrix
    form (separated Dirichlet-type extensions) or a closed-form denominator
    vanishes.
    """


class UnitarityError(ValueError):
    """Input matrix violates unitarity beyond the accepted tolerance."""
