"""Exception hierarchy. CLI exit codes hang off these classes."""

from __future__ import annotations


class MigrationError(Exception):
    exit_code = 1


class SourceError(MigrationError):
    """An error tied to a position in a source file."""

    exit_code = 2

    def __init__(self, message: str, filename: str = "<input>", line: int = 0, column: int = 0):
        super().__init__(message)
        self.message = message
        self.filename = filename
        self.line = line
        self.column = column

    def __str__(self) -> str:
        return f"{self.filename}:{self.line}:{self.column}: {self.message}"


class LexError(SourceError):
    pass


class ParseError(SourceError):
    pass


class UnsupportedConstructError(ParseError):
    pass


class LayoutError(MigrationError):
    exit_code = 3


class AnalysisError(SourceError):
    exit_code = 3


class ConfigError(MigrationError):
    exit_code = 1


class StateError(MigrationError):
    """Values or snapshots that do not fit the layout."""

    exit_code = 3


class IntegrityError(StateError):
    pass


class PlanningError(MigrationError):
    exit_code = 4


class DivergenceError(MigrationError):
    exit_code = 5

    def __init__(self, message: str, slot: int | None = None):
        super().__init__(message)
        self.slot = slot


class MetricError(MigrationError):
    exit_code = 3
