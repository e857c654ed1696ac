"""Exception types shared across the package."""


class UsageError(ValueError):
    """Invalid arguments, unknown catalog names, or violated preconditions."""


class NumericalFailure(RuntimeError):
    """Quadrature did not reach the requested tolerance.

    Carries the best available estimate, an error bound, and the per-level
    trace of running estimates so callers can inspect divergence.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf"), trace=()):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.trace = list(trace)
