"""Exception classes shared across the package.

The CLI maps these onto distinct exit-code classes, so raising the right
type matters more than the message text.
"""


class ValidationError(ValueError):
    """Invalid input data or parameters (bad matrix, out-of-range zeta, ...)."""


class CapacityError(ValidationError):
    """Problem size exceeds an exhaustive-enumeration cap."""


class NumericalError(RuntimeError):
    """A numeric routine failed (non-PD factorization, diverging solve)."""


class ParseError(ValidationError):
    """A data file could not be parsed; message carries the line number."""
