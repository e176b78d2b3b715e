"""Exception types shared by every module."""


class PellsumsError(Exception):
    """Base class for all library errors."""


class RangeError(PellsumsError, ValueError):
    """A numeric argument lies outside the operation's domain."""


class SquareInput(RangeError):
    """A perfect square was supplied where a nonsquare is required."""


class NotCoprime(PellsumsError, ValueError):
    """Two integers that must be coprime share a factor."""


class NotPrime(PellsumsError, ValueError):
    pass


class NotDivisor(PellsumsError, ValueError):
    pass


class BudgetExceeded(PellsumsError, RuntimeError):
    """An enumeration would exceed its configured work or memory cap."""
