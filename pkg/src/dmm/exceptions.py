class DMMError(Exception):
    """Base class for estimation failures raised by this package."""


class DegenerateDensityError(DMMError, ValueError):
    pass


class InsufficientSamplesError(DMMError, ValueError):
    pass


class ProjectionError(DMMError):
    """Moment projection did not converge; ``best`` holds the last iterate."""

    def __init__(self, message, best=None, iterations=0):
        super().__init__(message)
        self.best = best
        self.iterations = iterations


class QuadratureError(DMMError):
    pass


class EstimationError(DMMError):
    """An estimator could not produce a model; ``details`` carries diagnostics."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}
