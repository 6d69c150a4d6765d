"""Exception hierarchy shared by all precimat modules."""


class PrecimatError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(PrecimatError):
    """Argument outside its documented domain (non-finite, wrong shape, bad range)."""


class NotPositiveSemiDefinite(PrecimatError):
    """Matrix has an eigenvalue below the PSD tolerance."""


class NotPositiveDefinite(PrecimatError):
    """Matrix required to be strictly positive definite is not."""


class SingularMatrix(PrecimatError):
    """Matrix is singular (or numerically singular) where an inverse is required."""


class ConvergenceFailure(PrecimatError):
    """Iterative solver failed to converge.

    May carry a ``fit`` attribute with the partial result.
    """

    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class NumericalFailure(PrecimatError):
    """A numerically computed intermediate violates a required property."""


class GenerationFailure(PrecimatError):
    """Synthetic network generation could not satisfy its constraints."""


class SelectionFailure(PrecimatError):
    """Every grid point of a model-selection sweep failed.

    Carries ``point_errors``, a mapping from (lam, alpha) to the message
    of that point's failure.
    """

    def __init__(self, message, point_errors=None):
        super().__init__(message)
        self.point_errors = point_errors or {}


class InvalidSplit(PrecimatError):
    """A train/validation/test split left a class without enough rows."""


class InputError(PrecimatError):
    """Malformed input file; carries the offending ``row`` and ``col``."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class SpanError(PrecimatError):
    """Time span of the input is shorter than one rolling window."""


class UnsupportedDimension(PrecimatError):
    """Requested dimension outside the supported range of an operation."""
