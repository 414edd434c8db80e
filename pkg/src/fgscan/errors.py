"""Exception hierarchy shared across the package."""


class FgscanError(Exception):
    """Base class for all package-specific errors."""


class ParseError(FgscanError):
    """A file could not be parsed; names the offending row/column."""


class ValidationError(FgscanError):
    """Input data violates a documented contract."""


class EmptyDatasetError(ValidationError):
    """A dataset with zero rows was supplied."""


class DegenerateColumnError(ValidationError):
    """A covariate column is constant and cannot be standardized."""


class WeightUndefinedError(FgscanError):
    """A censoring-weight denominator is zero (beyond censoring support)."""


class SingularRiskSetError(FgscanError):
    """A risk-set denominator is zero or non-finite."""


class ComputationError(FgscanError):
    """Numerical failure (overflow/non-finite values) during evaluation."""


class ConvergenceError(FgscanError):
    """No fit on a tuning path converged."""
