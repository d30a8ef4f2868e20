"""Exception hierarchy shared across the benchmark toolkit."""


class OpsBenchError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(OpsBenchError):
    """A document is malformed; the message names the first offending field."""


class ValidationError(OpsBenchError):
    """A structurally sound document violates a model invariant."""


class PersistenceError(OpsBenchError):
    """Reading or writing a file failed; the message carries the path."""


class ContractError(OpsBenchError):
    """An operation was invoked outside its stated precondition."""


class ForgeError(OpsBenchError):
    """Case synthesis failed; the message is prefixed with the pipeline stage."""


class ProtocolViolation(OpsBenchError):
    """A wire message broke the episode protocol."""
