"""Shared exception types."""


class BrrkitError(Exception):
    """Base class for user-facing engine errors."""


class ProofAbort(Exception):
    """Raised by the :a! break command; unwinds to the top level."""
