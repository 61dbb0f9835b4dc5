"""Exception hierarchy shared across the package."""


class CholcovError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(CholcovError):
    """A pivot of the LDL^T factorization fell below tolerance.

    ``column`` is 1-based, matching the column at which the factorization
    broke down; ``pivot`` is the offending value.
    """

    def __init__(self, column, pivot):
        self.column = column
        self.pivot = pivot
        super().__init__(
            f"matrix is not positive definite: pivot {pivot:.6g} at column {column}"
        )


class NoConvergence(CholcovError):
    """An iterative routine exhausted its iteration budget."""


class DegenerateResidual(CholcovError):
    """A regression residual was (numerically) zero, so the variance
    estimate would be singular."""


class InvalidBand(CholcovError):
    """Band parameter k outside the admissible range for the data."""


class DimMismatch(CholcovError):
    """Two matrices that must share dimensions do not."""


class InsufficientData(CholcovError):
    """Not enough observations for the requested split or fit."""


class SingularCovariance(CholcovError):
    """A covariance estimate could not be inverted."""


class ParseError(CholcovError):
    """A data file could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShapeError(CholcovError):
    """A data file parsed but had the wrong shape."""
