"""Exception types raised across the package."""


class SoficLabError(Exception):
    pass


class GroupMismatch(SoficLabError, ValueError):
    pass


class WindowTooLarge(SoficLabError, ValueError):
    pass


class DegreeMismatch(SoficLabError, ValueError):
    pass


class EvaluationError(SoficLabError, LookupError):
    """An element could not be evaluated within the configured word-length cap."""


class ClosureError(SoficLabError, ValueError):
    """A window does not contain the products an operation needs."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class InconsistentPattern(SoficLabError, ValueError):
    pass


class WindowMismatch(SoficLabError, ValueError):
    pass


class GoodSampleNotFound(SoficLabError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class ConfigError(SoficLabError, ValueError):
    pass


class MissingSet(SoficLabError, KeyError):
    """A cylinder set needed by a check is not in the declared family."""
