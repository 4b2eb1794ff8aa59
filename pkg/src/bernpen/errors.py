"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, numerical failures exit 3.
"""


class BernpenError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(BernpenError, ValueError):
    """A parameter is outside its admissible set (e.g. rho > 1, alpha <= 0)."""


class DomainError(BernpenError, ValueError):
    """A function argument is outside the mathematical domain (e.g. s < 0)."""


class ContractViolationError(BernpenError, ValueError):
    """An input breaks a documented precondition (e.g. unstandardized design)."""


class NoRootError(BernpenError, ArithmeticError):
    """A closed-form root was requested where no real root exists."""


class DataFormatError(BernpenError, ValueError):
    """A data file could not be parsed; message carries the line number."""


class NumericalError(BernpenError, RuntimeError):
    """A numerical procedure failed to produce a usable result."""
