"""Exception hierarchy shared by every netreach module."""


class NetreachError(Exception):
    """Base class for all errors raised by netreach."""


class ParseError(NetreachError):
    """The network document is not well-formed (bad JSON, wrong top-level type)."""


class SchemaError(NetreachError):
    """The document parses but violates the network schema."""


class InvalidProfile(NetreachError):
    """A dimension profile requests zero or negative dimensions."""


class DimensionMismatch(NetreachError, ValueError):
    """Matrix or vector shapes are inconsistent."""


class NumericalFailure(NetreachError):
    """A linear-algebra routine (SVD, eigensolver) did not converge."""


class HorizonTooShort(NetreachError):
    """The projected steering map is row-deficient at the requested horizon."""

    def __init__(self, message, horizon=None, rank=None, required=None):
        super().__init__(message)
        self.horizon = horizon
        self.rank = rank
        self.required = required
