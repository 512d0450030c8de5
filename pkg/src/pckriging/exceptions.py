"""Exception hierarchy shared by all modules."""


class PckrigingError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PckrigingError):
    """Invalid or missing configuration (files, parameters, options)."""


class DataError(PckrigingError):
    """Malformed or inconsistent data (shapes, schemas, dimensions)."""


class DomainError(DataError):
    """A point lies outside the support of its input distribution."""


class NumericalError(PckrigingError):
    """Numerical failure during fitting or evaluation."""


class SingularSystemError(NumericalError):
    """Rank-deficient least-squares system."""


class DegenerateLeverageError(NumericalError):
    """Leverage ~ 1 makes the analytic leave-one-out error undefined."""


class ConditioningError(NumericalError):
    """Correlation matrix not positive definite within the nugget ladder."""


class SingularTrendError(NumericalError):
    """Rank-deficient trend matrix in generalized least squares."""
