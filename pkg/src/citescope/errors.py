"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI: ConfigError -> 1, data errors
(ParseError, ValidationError, StoreIntegrityError, AmbiguityError) -> 2,
NumericalError -> 3.
"""


class CitescopeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CitescopeError):
    """Bad usage or configuration (missing paths, invalid settings)."""


class ParseError(CitescopeError):
    """Malformed input record."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(CitescopeError):
    """Structurally valid input violating a data-model invariant."""


class StoreIntegrityError(CitescopeError):
    """Metadata store violates its uniqueness guarantees."""


class AmbiguityError(CitescopeError):
    """A document matches more than one metadata record."""


class NumericalError(CitescopeError):
    """Non-finite loss or other numerical failure during training."""
