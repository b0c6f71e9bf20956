"""Abstract syntax for Lucent programs.

Every node carries a ``span`` and, once type checked, a ``ty``.  Neither
takes part in equality, so two parses of equivalent text compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Iterator, Optional

from .diagnostics import NO_SPAN, SourceSpan
from .types import Type


def _meta():
    return field(default=None, compare=False, repr=False)


class Expr:
    __slots__ = ()
    span: SourceSpan
    ty: Optional[Type]

    def children(self) -> tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()


@dataclass(frozen=True)
class FloatLit(Expr):
    text: str  # decimal text, kept verbatim for exact round-tripping
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()


@dataclass(frozen=True)
class EodLit(Expr):
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()


@dataclass(frozen=True)
class Ref(Expr):
    name: str
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()


@dataclass(frozen=True)
class ListLit(Expr):
    elements: tuple[Expr, ...]
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return self.elements


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # + - * /
    lhs: Expr
    rhs: Expr
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return (self.lhs, self.rhs)


@dataclass(frozen=True)
class Compare(Expr):
    op: str  # < <= > >= == !=
    lhs: Expr
    rhs: Expr
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return (self.lhs, self.rhs)


@dataclass(frozen=True)
class Fby(Expr):
    first: Expr
    rest: Expr
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return (self.first, self.rest)


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    orelse: Optional[Expr]
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        if self.orelse is None:
            return (self.cond, self.then)
        return (self.cond, self.then, self.orelse)


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...]
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return self.args


@dataclass(frozen=True)
class Tl(Expr):
    operand: Expr
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class At(Expr):
    operand: Expr
    index: int
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class Concat(Expr):
    lhs: Expr
    rhs: Expr
    span: SourceSpan = _meta()
    ty: Optional[Type] = _meta()

    def children(self):
        return (self.lhs, self.rhs)


@dataclass(frozen=True)
class Param:
    name: str
    type: Type
    span: SourceSpan = _meta()


@dataclass(frozen=True)
class Equation:
    lhs: str
    declared_type: Optional[Type]
    rhs: Expr
    span: SourceSpan = _meta()


@dataclass(frozen=True)
class FilterDecl:
    name: str
    external: bool
    output_type: Type
    params: tuple[Param, ...]
    equations: tuple[Equation, ...]
    span: SourceSpan = _meta()

    @property
    def output_equation(self) -> Equation:
        for eq in self.equations:
            if eq.lhs == self.name:
                return eq
        raise KeyError(self.name)

    @property
    def sequences(self) -> tuple[Equation, ...]:
        return tuple(eq for eq in self.equations if eq.lhs != self.name)

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Program:
    decls: tuple[FilterDecl, ...]
    file: str = field(default="<input>", compare=False)

    def lookup(self, name: str) -> Optional[FilterDecl]:
        for d in self.decls:
            if d.name == name:
                return d
        return None


def walk(expr: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [expr]
    while stack:
        e = stack.pop()
        yield e
        stack.extend(reversed(e.children()))


def rebuild(expr: Expr, **changes) -> Expr:
    return replace(expr, **changes)


def child_fields(expr: Expr) -> list[str]:
    """Names of fields holding sub-expressions (or tuples of them)."""
    out = []
    for f in fields(expr):
        v = getattr(expr, f.name)
        if isinstance(v, Expr) or (isinstance(v, tuple) and v and isinstance(v[0], Expr)):
            out.append(f.name)
        elif f.name in ("args", "elements"):
            out.append(f.name)
    return out


def map_children(expr: Expr, fn) -> Expr:
    """Copy of ``expr`` with ``fn`` applied to each direct sub-expression."""
    changes = {}
    for name in child_fields(expr):
        v = getattr(expr, name)
        if isinstance(v, tuple):
            changes[name] = tuple(fn(c) for c in v)
        elif v is not None:
            changes[name] = fn(v)
    return replace(expr, **changes) if changes else expr


def span_of(expr: Expr) -> SourceSpan:
    return expr.span if expr.span is not None else NO_SPAN
