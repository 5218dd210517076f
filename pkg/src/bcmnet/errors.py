"""Exception hierarchy shared by all bcmnet modules.

Two families matter to callers (and to the CLI exit codes): usage errors,
raised when inputs or parameters are malformed, and domain errors, raised
when well-formed inputs describe something the algorithms cannot handle.
"""


class BcmNetError(Exception):
    """Base class for every error raised by this package."""


class UsageError(BcmNetError, ValueError):
    """Malformed input, parameter or configuration."""


class DomainError(BcmNetError):
    """Valid input on which the requested operation is undefined."""


class InvalidEdge(UsageError):
    pass


class DuplicateEdge(UsageError):
    pass


class InvalidParams(UsageError):
    pass


class InvalidConfig(UsageError):
    pass


class InvalidRequest(UsageError):
    pass


class InvalidQuality(UsageError):
    pass


class InvalidPath(UsageError):
    pass


class ParseError(UsageError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DisconnectedTopology(DomainError):
    pass


class DegenerateTopology(DomainError):
    pass


class InvalidTopology(DomainError):
    pass


class GenerationFailed(DomainError):
    pass


class DisconnectedSubnet(DomainError):
    pass


class NoRemovableEdge(DomainError):
    pass


class NoAddableEdge(DomainError):
    pass


class NoPath(DomainError):
    pass


class LocalMinimum(DomainError):
    """No strictly improving rewiring was found within the candidate budget.

    ``best`` holds the least-bad ``(topology, step)`` that was examined, or
    None when no candidate move was admissible at all.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
