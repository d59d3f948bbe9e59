"""Error types for action-plan parsing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

ParseErrorKind = Literal[
    "unknown_agent",
    "missing_agent",
    "duplicate_agent",
    "unknown_verb",
    "malformed_waypoint",
    "out_of_bounds",
    "non_adjacent_path",
    "missing_argument",
    "malformed_line",
    "unexpected_argument",
]


@dataclass(frozen=True, slots=True)
class SourceSpan:
    """Location in the EXECUTE block for error reporting."""

    line: int  # 1-based
    col: int  # 1-based

    def __str__(self) -> str:
        return f"line {self.line}, col {self.col}"


class PlanParseError(Exception):
    """Raised when an EXECUTE block does not follow the action grammar."""

    def __init__(
        self, kind: ParseErrorKind, message: str, span: SourceSpan, fragment: str = ""
    ) -> None:
        self.kind = kind
        self.span = span
        self.message = message
        self.fragment = fragment
        super().__init__(f"{span}: {kind}: {message}")

    @property
    def line(self) -> int:
        return self.span.line

    @property
    def column(self) -> int:
        return self.span.col

    def to_dict(self) -> dict[str, object]:
        return {
            "kind": self.kind,
            "line": self.line,
            "column": self.column,
            "message": self.message,
            "fragment": self.fragment,
        }

    def render(self) -> str:
        """Feedback line shown to the agents on the next planning round."""

        where = f" near '{self.fragment}'" if self.fragment else ""
        return f"The plan could not be parsed ({self.kind}) at {self.span}{where}: {self.message}"
