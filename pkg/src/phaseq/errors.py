"""Shared exception types."""


class PhaseqError(Exception):
    """Base class for all library errors."""


class ParseError(PhaseqError):
    """Syntax or name error in an expression source string."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalError(PhaseqError):
    """Arithmetic failure while evaluating an expression."""

    def __init__(self, message: str, point_index: int | None = None):
        super().__init__(message)
        self.point_index = point_index


class ConfigError(PhaseqError):
    """Invalid run configuration."""
