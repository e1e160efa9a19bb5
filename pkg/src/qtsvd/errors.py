"""Exception types shared across the package."""


class QtsvdError(Exception):
    """Base class for errors raised by this package."""


class ShapeMismatchError(QtsvdError, ValueError):
    """Operands have incompatible dimensions."""


class DegenerateInputError(QtsvdError, ValueError):
    """Input is rank deficient where full rank is required."""


class SingularMatrixError(QtsvdError, ArithmeticError):
    """A matrix that must be inverted is singular or numerically so."""


class NumericalError(QtsvdError, ArithmeticError):
    """A numerical routine failed to meet its accuracy contract."""


class FixtureFormatError(QtsvdError, ValueError):
    """A serialized tensor file is malformed."""


class ConfigError(QtsvdError, ValueError):
    """Command-line or config-file settings are invalid."""


class OptimalityWarning(UserWarning):
    """Truncation computed under transforms without the scaled-orthogonal
    property; the best-approximation guarantee does not apply."""
