"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for every protocol or engine failure."""


class Unauthorized(EngineError):
    """Caller is not the designated party for the operation."""


class NotFound(EngineError):
    """Referenced account, entity, or stall does not exist."""


class InsufficientFunds(EngineError):
    """Account balance cannot cover the requested amount."""


class InvalidOperation(EngineError):
    """Precondition violated: bad state, bad terms, duplicate, overlap, or out-of-range value."""


class InvariantViolation(EngineError):
    """A structural audit check failed; indicates an engine bug, not a user error."""
