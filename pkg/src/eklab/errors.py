"""Exception types raised across eklab."""


class EKError(Exception):
    """Base class for all eklab errors."""


class DomainError(EKError, ValueError):
    """A parameter lies outside the domain where a quantity is defined."""


class PreconditionError(EKError, ValueError):
    """An operation's hypothesis does not hold for the given input."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResourceError(EKError, MemoryError):
    """A table would exceed the configured memory budget."""

    def __init__(self, what, required_bytes, budget_bytes):
        super().__init__(
            f"{what} needs {required_bytes} bytes, budget is {budget_bytes} bytes"
        )
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes


class IntegrityError(EKError):
    """A cache file is corrupt or does not match its recorded digest."""


class UsageError(EKError, ValueError):
    """Invalid command-line configuration."""
