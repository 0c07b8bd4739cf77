"""Exception types shared across the package.

The CLI maps these onto exit codes: ConstraintError -> 1, FormatError -> 2.
"""


class VisemekitError(Exception):
    """Base class for all errors raised by this package."""


class ConstraintError(VisemekitError, ValueError):
    """A domain precondition or invariant was violated (bad shapes, infeasible
    window, non-finite values, diverging optimization, ...)."""


class FormatError(VisemekitError, ValueError):
    """A file could not be parsed or failed its format-level validation."""


class DivergenceError(ConstraintError):
    """Optimization produced a non-finite loss."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"loss became non-finite at step {step}")
