"""Source spans and structured diagnostics.

Every rejection carries the name of the violated rule so tests (and users)
can assert on it; rendering follows the classic `file:line:col: rule: message`
shape.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """A source position: file name, 1-based line and column."""

    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NO_SPAN = Span("<none>", 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    """A type/syntax/runtime error with a rule name and source span."""

    rule: str
    message: str
    span: Span = NO_SPAN
    severity: str = "error"

    def render(self) -> str:
        return f"{self.span}: {self.rule}: {self.message}"

    def __str__(self) -> str:
        return self.render()


class CllsError(Exception):
    """Base for all errors raised with an attached diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


class LexError(CllsError):
    pass


class ParseError(CllsError):
    pass


class CheckError(CllsError):
    pass


class RuntimeFault(CllsError):
    """Raised by the runtime for arithmetic faults, deadlock and budget."""
