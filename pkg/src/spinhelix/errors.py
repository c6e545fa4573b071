"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SpinHelixError(ValueError):
    """Base class for all package errors."""


class InvalidNome(SpinHelixError):
    pass


class NonConvergent(SpinHelixError):
    pass


class NearPole(SpinHelixError):
    pass


class InvalidSpin(SpinHelixError):
    pass


class InvalidDims(SpinHelixError):
    pass


class RangeTooLarge(SpinHelixError):
    pass


class DimensionMismatch(SpinHelixError):
    pass


class DegenerateArgument(SpinHelixError):
    pass


class OutOfRange(SpinHelixError):
    pass


class TooLarge(SpinHelixError):
    pass


class WrongLength(SpinHelixError):
    pass


class NotCommensurate(SpinHelixError):
    """Raised when no integer pair (p, q) closes the helix along some axis.

    ``p``, ``q`` and ``residuals`` hold the nearest lattice point found for
    each axis so callers can report how far off the input was.
    """

    def __init__(self, message, p=(), q=(), residuals=()):
        super().__init__(message)
        self.p = tuple(p)
        self.q = tuple(q)
        self.residuals = tuple(residuals)
