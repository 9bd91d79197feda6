"""Exception types shared across the package."""

from __future__ import annotations


class RegraftError(Exception):
    """Base class for all errors raised by this package."""


class MetamodelError(RegraftError):
    pass


class GraphError(RegraftError):
    pass


class StaleCheckpointError(GraphError):
    pass


class ExprError(RegraftError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class ExprEvalError(ExprError):
    pass


class RuleError(RegraftError):
    pass


class MatchError(RegraftError):
    pass


class FormatError(RegraftError):
    """Parse or conformance failure in one of the text file formats.

    ``errors`` carries the full list of problems when a parse collects
    more than one; ``line``/``column`` locate the first offender.
    """

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None, errors: list[str] | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column
        self.errors = errors or [message]


class JavaParseError(FormatError):
    def __init__(self, message: str, *, file: str | None = None,
                 line: int | None = None, errors: list[str] | None = None):
        prefix = f"{file}: " if file else ""
        super().__init__(prefix + message, line=line, errors=errors)
        self.file = file


class EngineError(RegraftError):
    pass


class StepLimitExceeded(EngineError):
    pass
