"""Error taxonomy shared across the package.

ConfigError maps to CLI exit code 2, DataError to exit code 3. Everything else
is a programming error and surfaces as the usual ValueError/KeyError.
"""


class CareflowError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(CareflowError):
    """A configuration file or parameter block is invalid."""


class DataError(CareflowError):
    """An input dataset is malformed or insufficient for the requested fit."""
