class CloneflipError(Exception):
    """Base error class for all exceptions raised in this library.
    Will never be raised naked; more specific subclasses of this exception will
    be raised when appropriate."""


class StateDomainError(CloneflipError, ValueError):
    """Input outside the physical domain: bad norms, shapes, ranges."""


class ProtocolError(CloneflipError):
    """The restoring protocol was asked to do something it cannot do."""


class ConfigError(CloneflipError):
    def __init__(self, path, reason):
        self.path = path
        self.reason = reason

    def __str__(self):
        return self.__repr__()

    def __repr__(self):
        return "ConfigError(path={}, reason={})".format(self.path, self.reason)


class InvariantViolation(CloneflipError):
    def __init__(self, check, observed, expected):
        self.check = check
        self.observed = observed
        self.expected = expected

    def __str__(self):
        return self.__repr__()

    def __repr__(self):
        return "InvariantViolation(check={}, observed={}, expected={})".format(
            self.check,
            self.observed,
            self.expected,
        )
