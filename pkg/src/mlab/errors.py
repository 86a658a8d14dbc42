"""Exception hierarchy shared by every engine."""


class MlabError(Exception):
    """Base class for all library errors."""


class MalformedProgram(MlabError):
    pass


class ValidationError(MlabError, ValueError):
    """A domain object violates one of its invariants."""


class ParseError(MlabError):
    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class MissingHoldings(MlabError, KeyError):
    pass


class DimensionMismatch(MlabError, ValueError):
    pass


class EmptySupport(MlabError):
    """Every state is polar for the actual family."""


class ZeroMassNode(MlabError):
    """Conditional expectation requested at a node carrying no mass."""


class PreconditionFailed(MlabError):
    pass


class NoMeasure(MlabError):
    """No risk-neutral measure exists, so the requested price is undefined."""


class NotReplicable(MlabError):
    pass


class UnboundedBelow(MlabError):
    """Superhedging LP is unbounded: the market admits an arbitrage-like position."""


class TooLarge(MlabError):
    pass
