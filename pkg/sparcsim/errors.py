"""Exceptions raised by sparcsim.

The CLI maps these onto exit codes: configuration and file-format problems
exit with 2, numerical guard trips exit with 3.
"""


class SparcsimError(Exception):
    """Base class for sparcsim failures."""


class ConfigError(SparcsimError, ValueError):
    """A simulation config is missing a key or holds an invalid value."""


class DictionaryFormatError(SparcsimError, ValueError):
    """A dictionary interchange file is malformed or fails validation."""


class NumericalGuardError(SparcsimError, ArithmeticError):
    """A numerical safeguard tripped (divergence, search-space size, quadrature)."""
