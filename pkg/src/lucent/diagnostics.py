"""Source spans, diagnostics and the exception that carries them."""
from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line_start: int
    col_start: int
    line_end: int
    col_end: int

    def to(self, other: SourceSpan) -> SourceSpan:
        """Span covering ``self`` through ``other``."""
        return SourceSpan(self.file, self.line_start, self.col_start,
                          other.line_end, other.col_end)

    def __str__(self) -> str:
        return f"{self.file}:{self.line_start}:{self.col_start}"


NO_SPAN = SourceSpan("<builtin>", 1, 1, 1, 1)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan
    code: str = "E000"

    def render(self, color: bool = False) -> str:
        sev = self.severity
        if color:
            sev = ("\x1b[31m" if sev == "error" else "\x1b[33m") + sev + "\x1b[0m"
        return f"{self.span}: {sev}: {self.message}"

    def to_json(self) -> dict:
        s = self.span
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "file": s.file,
            "line": s.line_start,
            "col": s.col_start,
            "end_line": s.line_end,
            "end_col": s.col_end,
        }


def error(code: str, message: str, span: SourceSpan) -> Diagnostic:
    return Diagnostic("error", message, span, code)


def diagnostics_json(diags) -> str:
    return json.dumps([d.to_json() for d in diags], indent=2)


@dataclass
class LucentError(Exception):
    """Raised by every compiler pass; carries one or more diagnostics."""

    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __post_init__(self):
        super().__init__(self.diagnostics)

    def __str__(self) -> str:
        return "\n".join(d.render() for d in self.diagnostics)
