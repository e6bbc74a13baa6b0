"""Exception types.

Every error raised by the package carries a short machine-readable ``code``
(``"UNKNOWN_FEATURE"``, ``"RAGGED_ROW"``, ...) next to the human message, so
callers and the CLI can branch on the code rather than on message text.
"""

from __future__ import annotations

from dataclasses import dataclass


class VariselError(Exception):
    """Base class for input and contract errors raised by varisel."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class ModelError(VariselError):
    """Feature model or configuration misuse."""


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError("source spans are 1-based")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(VariselError):
    """DSL syntax or semantic error, located by a 1-based span."""

    CODES = ("SYNTAX", "DUPLICATE_ID", "UNKNOWN_REF", "BAD_GROUP")

    def __init__(self, code: str, message: str, span: SourceSpan):
        if code not in self.CODES:
            raise ValueError(f"unknown parse error code {code!r}")
        if not message:
            raise ValueError("parse error message must be nonempty")
        VariselError.__init__(self, code, f"{span}: {message}")
        self.message = message
        self.span = span


class DataError(VariselError):
    """Dataset ingestion, profiling or splitting error."""

    def __init__(self, code: str, message: str, row: int | None = None):
        super().__init__(code, message)
        self.row = row


class SelectorError(VariselError):
    """Selector precondition failure (placeholder items, unmapped algorithms)."""


class LearnerError(VariselError):
    """Training, prediction or prediction-file error."""


class MetricError(VariselError):
    """Metric undefined or called on invalid input."""


class PipelineError(VariselError):
    """Orchestration error (unknown metric ids, rendering a rejected run)."""
