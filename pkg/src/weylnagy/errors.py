"""Exception hierarchy shared by all modules."""


class WeylNagyError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WeylNagyError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class ResourceError(WeylNagyError):
    """A request would exceed a hard resource cap.

    ``achievable`` carries the best bound that fits within the cap.
    """

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class AccuracyError(WeylNagyError):
    """A numerical procedure could not reach the requested accuracy.

    ``estimate`` and ``bound`` carry the best result obtained before giving up.
    """

    def __init__(self, message, estimate=None, bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.bound = bound


class ConsistencyError(WeylNagyError):
    """Two routes that must agree by construction did not."""
