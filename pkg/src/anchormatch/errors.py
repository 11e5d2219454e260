"""Exception hierarchy shared across the package."""


class AnchorMatchError(Exception):
    """Base class for all errors raised by anchormatch."""


class GraphParseError(AnchorMatchError):
    """A graph file could not be parsed.

    ``line`` is the 1-based line number the problem was detected on
    (0 when the problem concerns the file as a whole).
    """

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class MalformedLineError(GraphParseError):
    pass


class UnknownVertexError(GraphParseError):
    pass


class DuplicateEdgeError(GraphParseError):
    pass


class SelfLoopError(GraphParseError):
    pass


class DegreeMismatchError(GraphParseError):
    pass


class NotAnEdgeError(AnchorMatchError, ValueError):
    """An operation that requires an edge was given a non-adjacent pair."""


class InvalidVertexError(AnchorMatchError, IndexError):
    pass


class UnsupportedParameterError(AnchorMatchError, ValueError):
    """A parameter value is outside what this implementation supports (e.g. k != 1)."""


class LabelOutOfRangeError(AnchorMatchError, ValueError):
    pass


class InfeasibleLabelGridError(AnchorMatchError, ValueError):
    pass


class EmptyTrainingSetError(AnchorMatchError, ValueError):
    pass


class DigestMismatchError(AnchorMatchError):
    """An index, model or key was produced under a different model/graph."""


class FormatError(AnchorMatchError):
    """A persisted binary file has the wrong magic, version or is truncated."""


class DisconnectedQueryError(AnchorMatchError, ValueError):
    pass


class QueryTooSmallError(AnchorMatchError, ValueError):
    pass


class OracleBoundError(AnchorMatchError, ValueError):
    pass


class GeneratorError(AnchorMatchError, ValueError):
    pass
