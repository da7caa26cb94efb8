"""Exception hierarchy shared by the numerical modules and the CLI."""

from __future__ import annotations


class PTStarError(Exception):
    """Base class; the CLI maps every subclass to exit code 1."""


class DimensionError(PTStarError, ValueError):
    pass


class NumericalFailure(PTStarError, ArithmeticError):
    pass


class DomainError(PTStarError, ValueError):
    pass


class NotARootError(PTStarError):
    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


class NoTransitionError(PTStarError):
    def __init__(self, message: str, counts: tuple[int, int]):
        super().__init__(message)
        self.counts = counts


class ContourResolutionError(PTStarError):
    pass


class SpectralPreconditionError(PTStarError, ValueError):
    pass
