"""Exception types shared across the library."""


class TorsionLabError(Exception):
    """Base class for failures raised by this package."""


class DomainError(TorsionLabError, ValueError):
    """An input lies outside the domain of validity of the object it targets."""


class ConvergenceError(TorsionLabError, RuntimeError):
    """An iterative solver failed to reach its tolerance.

    Carries the residual history of the failed run so callers can inspect
    how the iteration behaved.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class OracleError(TorsionLabError, RuntimeError):
    """A shooting solve could not bracket or refine its target.

    ``bracket`` holds the interval that was tried before giving up.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class DeformationError(TorsionLabError, RuntimeError):
    """A mesh deformation produced an invalid (inverted or degenerate) element."""
