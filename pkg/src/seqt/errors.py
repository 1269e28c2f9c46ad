"""Exception types shared across the library."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateSampleError(DomainError):
    """The sample carries no scale information (all observations equal)."""


class NumericalError(ArithmeticError):
    """An iterative numerical routine failed to reach its tolerance."""


class DataError(ValueError):
    """An input data file could not be parsed."""
