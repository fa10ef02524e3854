"""Exception hierarchy shared by every module."""


class CBoundaryError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(CBoundaryError, ValueError):
    pass


class ExpressionError(InvalidInputError):
    """Raised when an expression string does not parse in the grammar."""

    def __init__(self, message: str, text: str = "", position: int | None = None):
        self.text = text
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)


class InvalidFieldError(InvalidInputError):
    pass


class DegenerateEdgeError(InvalidInputError):
    pass


class DegenerateSegmentError(InvalidInputError):
    pass


class VertexLookupError(CBoundaryError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else "unknown vertex"


class InvalidProfileError(InvalidInputError):
    pass


class UnsolvableError(CBoundaryError):
    """The time reparameterization has no solution on the requested side."""


class UndecidableError(CBoundaryError):
    pass


class NotCauchyError(CBoundaryError):
    pass


class MissingClassError(CBoundaryError):
    pass


class NotTimelikeError(CBoundaryError):
    pass


class IncompatibleError(CBoundaryError):
    pass


class InvalidMetricError(InvalidInputError):
    pass


class NotSPairableError(CBoundaryError):
    pass


class ProjectionUndefinedError(CBoundaryError):
    pass
