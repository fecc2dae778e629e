"""Exception hierarchy shared by the library and the CLI."""

from typing import Any, Optional


class AssocLabError(Exception):
    """Base class for all assoclab errors."""

    exit_code = 1


class InputError(AssocLabError, ValueError):
    """Malformed instance, out-of-range coordinate or nonsensical parameter."""

    exit_code = 1


class VerificationFailure(AssocLabError):
    """A checked property did not hold."""

    exit_code = 2


class QuadrangleFailure(VerificationFailure):
    """Raised when a construction needs the quadrangle condition and it fails."""

    def __init__(self, message: str, violation: Optional[Any] = None):
        super().__init__(message)
        self.violation = violation


class ResourceExhausted(AssocLabError):
    """A state, point or time budget ran out before a complete answer."""

    exit_code = 3

    def __init__(self, message: str, budget: Optional[int] = None):
        super().__init__(message)
        self.budget = budget
