from __future__ import annotations


class ShrinkboundError(Exception):
    """Base class for all errors raised by shrinkbound."""


class DomainError(ShrinkboundError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedError(DomainError):
    """The operation is only defined for a special case (e.g. k = 2)."""


class DataError(ShrinkboundError, ValueError):
    """Input data could not be read or violates a dataset invariant."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where = f"{where}{line}:"
        super().__init__(f"{where} {message}" if where else message)


class PriorSpecError(ShrinkboundError, ValueError):
    """A heterogeneity prior specification string did not parse."""


class NumericalError(ShrinkboundError, ArithmeticError):
    """A numerical routine failed."""


class ConvergenceError(NumericalError):
    """Adaptive routine stopped before reaching the requested tolerance."""

    def __init__(self, message: str, estimate=None, error_estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class BracketError(NumericalError):
    """Root finding was given an interval without a sign change."""
