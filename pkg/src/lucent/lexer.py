"""Tokenizer with offside-rule INDENT/DEDENT insertion.

Lines are joined implicitly inside ``(...)`` and ``[...]``.  Blank and
comment-only lines never affect indentation.  When a line dedents to a
column that is deeper than the enclosing level but not on the indentation
stack (the ``else:`` placement of the stencil example), a DEDENT is
followed by an INDENT to the new column, so the stream stays balanced.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .diagnostics import LucentError, SourceSpan, error

KEYWORDS = frozenset({"external", "filter", "where", "if", "then", "else", "fi", "fby", "EOD"})

INDENT = "indent"
DEDENT = "dedent"
NEWLINE = "newline"
EOF = "end_of_file"
IDENT = "identifier"
INT = "int_literal"
FLOAT = "float_literal"
KEYWORD = "keyword"
OP = "operator"

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<float>[0-9]+\.[0-9]+)
  | (?P<int>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>::|<=|>=|==|!=|[-+*/<>=:,()\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan

    def is_op(self, text: str) -> bool:
        return self.kind == OP and self.text == text

    def is_kw(self, text: str) -> bool:
        return self.kind == KEYWORD and self.text == text

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r})"


def lex(source: str, file: str = "<input>") -> list[Token]:
    """Tokenize ``source``; raises LucentError listing every lexical error."""
    tokens: list[Token] = []
    diags = []
    stack = [0]
    depth = 0  # bracket nesting
    indent_char = None
    lines = source.split("\n")

    def sp(line, c0, c1):
        return SourceSpan(file, line, c0 + 1, line, c1 + 1)

    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r")
        pos = 0
        if depth == 0:
            stripped = line.lstrip(" \t")
            if not stripped or stripped.startswith("#"):
                continue
            lead = line[: len(line) - len(stripped)]
            if lead:
                kinds = set(lead)
                if len(kinds) > 1 or (indent_char is not None and lead[0] != indent_char):
                    diags.append(error("L002", "indentation mixes tabs and spaces",
                                       sp(lineno, 0, len(lead))))
                if indent_char is None:
                    indent_char = lead[0]
            col = len(lead)
            at = sp(lineno, col, col)
            if col > stack[-1]:
                stack.append(col)
                tokens.append(Token(INDENT, "", at))
            elif col < stack[-1]:
                while col < stack[-1]:
                    stack.pop()
                    tokens.append(Token(DEDENT, "", at))
                if col > stack[-1]:
                    stack.append(col)
                    tokens.append(Token(INDENT, "", at))
            pos = col
        while pos < len(line):
            m = _TOKEN_RE.match(line, pos)
            if m is None:
                diags.append(error("L001", f"unknown character {line[pos]!r}",
                                   sp(lineno, pos, pos + 1)))
                pos += 1
                continue
            kind = m.lastgroup
            text = m.group()
            span = sp(lineno, pos, m.end())
            pos = m.end()
            if kind in ("ws", "comment"):
                continue
            if kind == "name":
                tokens.append(Token(KEYWORD if text in KEYWORDS else IDENT, text, span))
            elif kind == "int":
                tokens.append(Token(INT, text, span))
            elif kind == "float":
                tokens.append(Token(FLOAT, text, span))
            else:
                if text in ("(", "["):
                    depth += 1
                elif text in (")", "]"):
                    depth = max(0, depth - 1)
                tokens.append(Token(OP, text, span))
        if depth == 0 and tokens and tokens[-1].kind not in (NEWLINE, INDENT, DEDENT):
            end = len(line)
            tokens.append(Token(NEWLINE, "", sp(lineno, end, end)))

    last = len(lines)
    end_col = len(lines[-1]) if lines else 0
    eof_span = SourceSpan(file, last, end_col + 1, last, end_col + 1)
    if depth and tokens and tokens[-1].kind != NEWLINE:
        tokens.append(Token(NEWLINE, "", eof_span))
    while len(stack) > 1:
        stack.pop()
        tokens.append(Token(DEDENT, "", eof_span))
    tokens.append(Token(EOF, "", eof_span))
    if diags:
        raise LucentError(diags)
    return tokens
