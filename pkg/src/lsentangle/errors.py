"""Exception types shared across the package."""


class LSEntangleError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(LSEntangleError, ValueError):
    """Input violates an operation's preconditions."""


class UnsupportedInputError(LSEntangleError, ValueError):
    """Input is well formed but outside what the operation supports (e.g. truncated spectra)."""


class CapExceededError(LSEntangleError, RuntimeError):
    """A configured size cap (dimension, length) would be exceeded."""
