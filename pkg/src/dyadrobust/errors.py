"""Exception types shared across the package."""

__all__ = [
    "DyadRobustError",
    "DataError",
    "RankDeficiencyError",
    "SeparationError",
    "ConvergenceError",
    "LeverageError",
]


class DyadRobustError(Exception):
    """Base class for all errors raised by this package."""


class DataError(DyadRobustError, ValueError):
    """Invalid input data: malformed file, bad schema, or an inconsistent dataset."""


class RankDeficiencyError(DyadRobustError, ValueError):
    """The design matrix is rank deficient.

    ``column`` is the index of the first redundant column found by the
    pivoted QR factorization; ``column_name`` is its label when known.
    """

    def __init__(self, column, column_name=None):
        self.column = int(column)
        self.column_name = column_name
        label = column_name if column_name is not None else f"column {column}"
        super().__init__(
            f"design matrix is rank deficient: {label} is collinear with the "
            "other regressors"
        )


class SeparationError(DyadRobustError, ValueError):
    """Perfect or quasi-perfect separation detected during a logistic fit."""


class ConvergenceError(DyadRobustError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class LeverageError(DyadRobustError, ValueError):
    """A leverage value of one makes the requested estimator undefined."""
