"""Recursive-descent parser for Lucent.

Binding strength, loosest first::

    fby                      right-assoc
    < <= > >= == !=          non-assoc
    ::                       right-assoc
    + -                      left-assoc
    * /                      left-assoc
    unary -
    primary                  literals, EOD, names, calls, tl(), at(), [..], (..), inline if

The full grammar lives in docs/grammar.md.
"""
from __future__ import annotations

from . import ast as A
from .diagnostics import Diagnostic, LucentError, SourceSpan, error
from .lexer import DEDENT, EOF, FLOAT, IDENT, INDENT, INT, KEYWORD, NEWLINE, Token, lex
from .types import SCALARS, ListOf, Type

BUILTINS = frozenset({"tl", "at"})
INT_MAX = 2**31 - 1
COMPARE_OPS = ("<", "<=", ">", ">=", "==", "!=")


class ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


class Parser:
    def __init__(self, tokens: list[Token], file: str = "<input>"):
        self.toks = tokens
        self.i = 0
        self.file = file

    # -- token helpers

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != EOF:
            self.i += 1
        return t

    def fail(self, msg: str, tok: Token | None = None, code: str = "P001"):
        tok = tok or self.peek()
        raise ParseError(error(code, msg, tok.span))

    def describe(self, tok: Token) -> str:
        if tok.kind in (INDENT, DEDENT, NEWLINE, EOF):
            return {INDENT: "indentation", DEDENT: "dedent", NEWLINE: "end of line",
                    EOF: "end of file"}[tok.kind]
        return repr(tok.text)

    def expect_op(self, text: str, what: str | None = None) -> Token:
        t = self.peek()
        if not t.is_op(text):
            self.fail(f"expected {what or repr(text)}, found {self.describe(t)}")
        return self.advance()

    def expect_kw(self, text: str, what: str | None = None, code: str = "P001") -> Token:
        t = self.peek()
        if not t.is_kw(text):
            self.fail(f"expected {what or repr(text)}, found {self.describe(t)}", code=code)
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            self.fail(f"expected {what}, found {self.describe(t)}")
        return self.advance()

    def expect_name(self, what: str) -> Token:
        t = self.expect_kind(IDENT, what)
        if t.text in BUILTINS:
            self.fail(f"'{t.text}' is a builtin and cannot be used as a name", t, code="P006")
        return t

    # -- declarations

    def parse_program(self) -> A.Program:
        decls: list[A.FilterDecl] = []
        diags: list[Diagnostic] = []
        seen: dict[str, A.FilterDecl] = {}
        while self.peek().kind != EOF:
            start = self.i
            try:
                d = self.parse_decl()
            except ParseError as exc:
                diags.append(exc.diag)
                self.recover(start)
                continue
            if d.name in seen:
                diags.append(error("P005", f"duplicate declaration '{d.name}'", d.span))
            else:
                seen[d.name] = d
                decls.append(d)
        if diags:
            raise LucentError(diags)
        return A.Program(tuple(decls), self.file)

    def recover(self, start: int) -> None:
        """Skip to the next top-level declaration keyword."""
        self.i = start
        depth = 0
        first = True
        while self.peek().kind != EOF:
            t = self.peek()
            if t.kind == INDENT:
                depth += 1
            elif t.kind == DEDENT:
                depth -= 1
            elif depth <= 0 and not first and (t.is_kw("external") or t.is_kw("filter")):
                return
            first = False
            self.advance()

    def parse_decl(self) -> A.FilterDecl:
        t = self.peek()
        if not (t.is_kw("external") or t.is_kw("filter")):
            self.fail(f"expected 'external' or 'filter' declaration, found {self.describe(t)}")
        kw = self.advance()
        name = self.expect_name("filter name")
        self.expect_op(":", "':' before output type")
        out_ty = self.parse_type()
        self.expect_op("(", "'(' opening the parameter list")
        params: list[A.Param] = []
        if not self.peek().is_op(")"):
            while True:
                pn = self.expect_name("parameter name")
                self.expect_op(":", "':' after parameter name")
                pty = self.parse_type()
                params.append(A.Param(pn.text, pty, pn.span))
                if self.peek().is_op(","):
                    self.advance()
                    continue
                break
        self.expect_op(")", "')' closing the parameter list")
        if not self.peek().is_kw("where"):
            self.fail(f"missing 'where:' after declaration header, found {self.describe(self.peek())}",
                      code="P002")
        self.advance()
        if not self.peek().is_op(":"):
            self.fail("missing ':' after 'where'", code="P002")
        self.advance()
        self.expect_kind(NEWLINE, "end of line after 'where:'")
        if self.peek().kind != INDENT:
            self.fail("expected an indented block of equations", code="P003")
        self.advance()
        eqs: list[A.Equation] = []
        while self.peek().kind not in (DEDENT, EOF):
            eqs.append(self.parse_equation(name.text))
        end = self.expect_kind(DEDENT, "dedent closing the declaration")
        return A.FilterDecl(name.text, kw.text == "external", out_ty, tuple(params),
                            tuple(eqs), kw.span.to(end.span))

    def parse_type(self) -> Type:
        t = self.expect_kind(IDENT, "a type")
        if t.text in SCALARS:
            return SCALARS[t.text]
        if t.text == "list":
            self.expect_op("[", "'[' after 'list'")
            elem = self.parse_type()
            self.expect_op(",", "',' before list length")
            n = self.expect_kind(INT, "list length")
            if int(n.text) < 1:
                self.fail("list length must be at least 1", n, code="P007")
            self.expect_op("]", "']' closing list type")
            return ListOf(elem, int(n.text))
        self.fail(f"unknown type '{t.text}'", t, code="P007")

    def parse_equation(self, filter_name: str) -> A.Equation:
        if self.peek().kind == INDENT:
            self.fail("unexpected indentation", code="P003")
        lhs = self.expect_name("equation name")
        declared = None
        if self.peek().is_op(":"):
            self.advance()
            declared = self.parse_type()
            if lhs.text == filter_name:
                self.fail(f"output equation '{filter_name}' must not carry a type annotation",
                          lhs, code="P008")
        self.expect_op("=", "'=' in equation")
        rhs, block = self.parse_body()
        if not block:
            if self.peek().kind != NEWLINE:
                self.fail(f"expected end of line after equation, found {self.describe(self.peek())}")
            self.advance()
        return A.Equation(lhs.text, declared, rhs, lhs.span.to(rhs.span))

    # -- expressions

    def parse_body(self) -> tuple[A.Expr, bool]:
        """An equation right-hand side or block-if branch: (expr, ended_in_block)."""
        if self.peek().is_kw("if") and self.block_if_ahead():
            return self.parse_block_if(), True
        return self.parse_expr(), False

    def block_if_ahead(self) -> bool:
        k = 1
        if not self.peek(k).is_op("("):
            return False
        depth = 0
        while True:
            t = self.peek(k)
            if t.kind == EOF:
                return False
            if t.is_op("(") or t.is_op("["):
                depth += 1
            elif t.is_op(")") or t.is_op("]"):
                depth -= 1
                if depth == 0:
                    break
            k += 1
        return self.peek(k + 1).is_kw("then") and self.peek(k + 2).is_op(":")

    def end_block(self, ended_in_block: bool) -> Token:
        if not ended_in_block:
            if self.peek().kind != NEWLINE:
                self.fail(f"expected end of line, found {self.describe(self.peek())}")
            self.advance()
        if self.peek().kind != DEDENT:
            self.fail("unbalanced indentation: expected dedent closing the block", code="P003")
        return self.advance()

    def parse_block_if(self) -> A.If:
        start = self.expect_kw("if")
        cond = self.parse_condition()
        self.expect_kw("then")
        self.expect_op(":")
        self.expect_kind(NEWLINE, "end of line after 'then:'")
        if self.peek().kind != INDENT:
            self.fail("expected an indented block after 'then:'", code="P003")
        self.advance()
        then, blk = self.parse_body()
        self.end_block(blk)
        end_span = then.span
        orelse = None
        extra = False
        if self.peek().kind == INDENT and self.peek(1).is_kw("else"):
            self.advance()
            extra = True
        if self.peek().is_kw("else"):
            self.advance()
            self.expect_op(":", "':' after block 'else'")
            self.expect_kind(NEWLINE, "end of line after 'else:'")
            if self.peek().kind != INDENT:
                self.fail("expected an indented block after 'else:'", code="P003")
            self.advance()
            orelse, blk = self.parse_body()
            self.end_block(blk)
            end_span = orelse.span
            if extra:
                if self.peek().kind != DEDENT:
                    self.fail("unbalanced indentation after 'else:' block", code="P003")
                self.advance()
        return A.If(cond, then, orelse, start.span.to(end_span))

    def parse_condition(self) -> A.Expr:
        if not self.peek().is_op("("):
            self.fail("condition of 'if' must be parenthesized", code="P009")
        self.advance()
        cond = self.parse_expr()
        self.expect_op(")", "')' closing the condition")
        return cond

    def parse_expr(self) -> A.Expr:
        return self.parse_fby()

    def parse_fby(self) -> A.Expr:
        lhs = self.parse_compare()
        if self.peek().is_kw("fby"):
            self.advance()
            rhs = self.parse_fby()
            return A.Fby(lhs, rhs, lhs.span.to(rhs.span))
        return lhs

    def parse_compare(self) -> A.Expr:
        lhs = self.parse_concat()
        t = self.peek()
        if t.kind == "operator" and t.text in COMPARE_OPS:
            self.advance()
            rhs = self.parse_concat()
            nxt = self.peek()
            if nxt.kind == "operator" and nxt.text in COMPARE_OPS:
                self.fail("comparison operators do not chain; add parentheses", nxt, code="P010")
            return A.Compare(t.text, lhs, rhs, lhs.span.to(rhs.span))
        return lhs

    def parse_concat(self) -> A.Expr:
        lhs = self.parse_additive()
        if self.peek().is_op("::"):
            self.advance()
            rhs = self.parse_concat()
            return A.Concat(lhs, rhs, lhs.span.to(rhs.span))
        return lhs

    def parse_additive(self) -> A.Expr:
        lhs = self.parse_multiplicative()
        while self.peek().is_op("+") or self.peek().is_op("-"):
            op = self.advance().text
            rhs = self.parse_multiplicative()
            lhs = A.Binary(op, lhs, rhs, lhs.span.to(rhs.span))
        return lhs

    def parse_multiplicative(self) -> A.Expr:
        lhs = self.parse_unary()
        while self.peek().is_op("*") or self.peek().is_op("/"):
            op = self.advance().text
            rhs = self.parse_unary()
            lhs = A.Binary(op, lhs, rhs, lhs.span.to(rhs.span))
        return lhs

    def parse_unary(self) -> A.Expr:
        if self.peek().is_op("-"):
            t = self.advance()
            operand = self.parse_unary()
            return A.Neg(operand, t.span.to(operand.span))
        return self.parse_primary()

    def parse_primary(self) -> A.Expr:
        t = self.peek()
        if t.kind == INT:
            self.advance()
            v = int(t.text)
            if v > INT_MAX:
                self.fail(f"integer literal {t.text} does not fit in 32 bits", t, code="P011")
            return A.IntLit(v, t.span)
        if t.kind == FLOAT:
            self.advance()
            return A.FloatLit(t.text, t.span)
        if t.is_kw("EOD"):
            self.advance()
            return A.EodLit(t.span)
        if t.is_kw("if"):
            return self.parse_inline_if()
        if t.is_op("("):
            self.advance()
            e = self.parse_expr()
            self.expect_op(")", "')'")
            return e
        if t.is_op("["):
            self.advance()
            if self.peek().is_op("]"):
                self.fail("list literal must have at least one element", code="P007")
            elems = [self.parse_expr()]
            while self.peek().is_op(","):
                self.advance()
                elems.append(self.parse_expr())
            end = self.expect_op("]", "']' closing list literal")
            return A.ListLit(tuple(elems), t.span.to(end.span))
        if t.kind == IDENT:
            if t.text == "tl":
                self.advance()
                self.expect_op("(", "'(' after 'tl'")
                operand = self.parse_expr()
                end = self.expect_op(")", "')' closing 'tl'")
                return A.Tl(operand, t.span.to(end.span))
            if t.text == "at":
                self.advance()
                self.expect_op("(", "'(' after 'at'")
                operand = self.parse_expr()
                self.expect_op(",", "',' before the index of 'at'")
                idx = self.peek()
                if idx.kind != INT:
                    self.fail("index of 'at' must be a non-negative integer literal", idx, code="P012")
                self.advance()
                end = self.expect_op(")", "')' closing 'at'")
                return A.At(operand, int(idx.text), t.span.to(end.span))
            self.advance()
            if self.peek().is_op("("):
                self.advance()
                args: list[A.Expr] = []
                if not self.peek().is_op(")"):
                    args.append(self.parse_expr())
                    while self.peek().is_op(","):
                        self.advance()
                        args.append(self.parse_expr())
                end = self.expect_op(")", "')' closing the call")
                return A.Call(t.text, tuple(args), t.span.to(end.span))
            return A.Ref(t.text, t.span)
        if t.kind == KEYWORD:
            self.fail(f"unexpected keyword '{t.text}'")
        self.fail(f"expected an expression, found {self.describe(t)}")

    def parse_inline_if(self) -> A.If:
        start = self.expect_kw("if")
        cond = self.parse_condition()
        self.expect_kw("then")
        if self.peek().is_op(":"):
            self.fail("block 'then:' is only allowed as a whole equation or branch body")
        then = self.parse_expr()
        orelse = None
        if self.peek().is_kw("else"):
            self.advance()
            orelse = self.parse_expr()
        end = self.expect_kw("fi", "'fi' closing inline conditional", code="P004")
        return A.If(cond, then, orelse, start.span.to(end.span))

    def at_end(self) -> bool:
        return self.peek().kind == EOF


def parse(tokens: list[Token], file: str | None = None) -> A.Program:
    """Parse a token list (from :func:`lex`) into a Program; raises LucentError."""
    if file is None:
        file = tokens[-1].span.file if tokens else "<input>"
    p = Parser(tokens, file)
    prog = p.parse_program()
    assert p.at_end()
    return prog


def parse_source(source: str, file: str = "<input>") -> A.Program:
    return parse(lex(source, file), file)


def parse_expression(text: str) -> A.Expr:
    """Parse a single expression; used by tests and tooling."""
    p = Parser(lex(text))
    try:
        e = p.parse_expr()
    except ParseError as exc:
        raise LucentError([exc.diag]) from None
    while p.peek().kind == NEWLINE:
        p.advance()
    if not p.at_end():
        t = p.peek()
        raise LucentError([error("P001", f"unexpected {p.describe(t)} after expression", t.span)])
    return e


__all__ = ["parse", "parse_source", "parse_expression", "Parser", "SourceSpan"]
