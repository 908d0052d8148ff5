"""Exception hierarchy shared by all pstab modules."""


class PstabError(Exception):
    """Base class for all errors raised by this package."""


class RejectedInputError(PstabError, ValueError):
    """An argument is outside the documented domain of an operation."""


class DomainError(RejectedInputError):
    """A point lies outside the region where a function is defined."""


class RamanujanBoundError(RejectedInputError):
    """An eigenvalue violates |lambda| <= 2 p^((kappa-1)/2)."""


class UnsupportedInputError(RejectedInputError):
    """The input is declared to lack a property the algorithm requires."""


class IncompleteSourceError(PstabError, LookupError):
    """A coefficient source is missing a value that the computation needs."""


class IdentityError(PstabError, ArithmeticError):
    """Two independently computed expressions disagree beyond tolerance."""


class OrderingError(PstabError, ValueError):
    """A stream that must be sorted by norm showed a norm decrease."""


class NormalizationError(PstabError, ValueError):
    """A reciprocal root exceeds the unit disc beyond tolerance."""


class AccuracyError(PstabError, ArithmeticError):
    """A quadrature mesh could not certify the requested tolerance."""


class ReductionError(PstabError, RuntimeError):
    """Fundamental-domain reduction failed to terminate (cycle guard)."""
