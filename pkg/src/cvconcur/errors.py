"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: domain-negative results exit 1,
configuration/argument problems exit 2, numeric range problems exit 3.
"""


class CVError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(CVError, ValueError):
    pass


class OutOfRangeError(CVError, ValueError):
    """An input lies outside a declared validity range."""


class NumericRangeError(CVError, ArithmeticError):
    """A computation would overflow or exceed a configured size cap."""


class NoSolutionError(CVError):
    pass


class UnbalanceableError(CVError):
    pass


class ConfigError(CVError, ValueError):
    pass
