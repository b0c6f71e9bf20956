"""Denotational reference evaluator, used only as a test oracle.

Streams are computed straight from their recurrences over a typed program,
without building a machine:

    (x fby y)(t) = x(0) if t == 0 else y(t - 1)
    self(t)      = out(t - 1), the type default at t == 0
    op(x, y)(t)  = op(x(t), y(t))

A filter's stream has an element at index t only while every stream it
consumes has one, and it stops after its first EOD.  Arithmetic here is
done independently of the engine: binary32 by rounding IEEE doubles via
``struct``, int32 by masking.
"""
from __future__ import annotations

import math
import struct
from typing import Mapping

from . import ast as A
from .semantics import TypedProgram, has_silent_path
from .types import BOOL, FLOAT, INT, Type
from .values import EOD


class ReferenceRefused(ValueError):
    """The program has conditionals without ``else`` on the queried path."""


class ReferenceFault(ArithmeticError):
    pass


def _f32(x: float) -> float:
    if math.isnan(x):
        return math.nan
    try:
        return struct.unpack("<f", struct.pack("<f", x))[0]
    except OverflowError:  # rounds past the largest finite binary32
        return math.copysign(math.inf, x)


def _i32(x: int) -> int:
    x &= 0xFFFFFFFF
    return x - (1 << 32) if x & 0x80000000 else x


def _default(ty: Type):
    if ty == INT:
        return 0
    if ty == FLOAT:
        return 0.0
    if ty == BOOL:
        return False
    return tuple(_default(ty.elem) for _ in range(ty.length))


def _to_host(v, ty: Type):
    if v is EOD:
        return EOD
    if ty == FLOAT:
        return _f32(float(v))
    if ty == INT:
        return int(v)
    if ty == BOOL:
        return bool(v)
    return tuple(_to_host(x, ty.elem) for x in v)


def _arith(op: str, a, b, ty: Type):
    if ty == INT:
        if op == "+":
            return _i32(a + b)
        if op == "-":
            return _i32(a - b)
        if op == "*":
            return _i32(a * b)
        if b == 0:
            raise ReferenceFault("integer division by zero")
        q = a // b
        if q < 0 and q * b != a:
            q += 1
        return _i32(q)
    if op == "+":
        return _f32(a + b)
    if op == "-":
        return _f32(a - b)
    if op == "*":
        return _f32(a * b)
    if b == 0.0:
        if math.isnan(a) or a == 0.0:
            return math.nan
        neg = (math.copysign(1.0, a) < 0) != (math.copysign(1.0, b) < 0)
        return -math.inf if neg else math.inf
    return _f32(a / b)


def _eq(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_eq(x, y) for x, y in zip(a, b))
    return a == b


class _Fault:
    def __init__(self, exc: Exception):
        self.exc = exc


class _Stream:
    """One filter (or argument expression) evaluated over time."""

    def __init__(self, ref: "_Reference", equations: dict[str, A.Expr], output: str,
                 out_type: Type, consumed: dict[str, list]):
        self.ref = ref
        self.eqs = equations
        self.output = output
        self.out_type = out_type
        self.consumed = consumed  # port name -> stream values
        self.memo: dict[tuple[int, int], object] = {}
        self.values: list = []
        self.seq_values: dict[str, list] = {n: [] for n in equations if n != output}

    def run(self, limit: int) -> list:
        t = 0
        while t < limit and all(len(s) > t for s in self.consumed.values()):
            for name in self.seq_values:
                self.seq_values[name].append(self._safe(self.eqs[name], t))
            for node in self._fbys():
                self._safe(node.rest, t)
            v = self.val(self.eqs[self.output], t)
            self.values.append(v)
            t += 1
            if v is EOD:
                break
        return self.values

    def _fbys(self):
        return [n for e in self.eqs.values() for n in A.walk(e) if isinstance(n, A.Fby)]

    def _safe(self, e, t):
        try:
            return self.val(e, t)
        except ReferenceFault:
            return None

    def val(self, e: A.Expr, t: int):
        key = (id(e), t)
        if key in self.memo:
            v = self.memo[key]
            if isinstance(v, _Fault):
                raise v.exc
            return v
        try:
            v = self._val(e, t)
        except ReferenceFault as exc:
            self.memo[key] = _Fault(exc)
            raise
        self.memo[key] = v
        return v

    def _val(self, e: A.Expr, t: int):
        if isinstance(e, A.IntLit):
            return e.value
        if isinstance(e, A.FloatLit):
            return _f32(float(e.text))
        if isinstance(e, A.EodLit):
            return EOD
        if isinstance(e, A.Ref):
            if e.name == self.output:
                return self.values[t - 1] if t > 0 else _default(self.out_type)
            if e.name in self.consumed:
                return self.consumed[e.name][t]
            return self.val(self.eqs[e.name], t)
        if isinstance(e, A.Fby):
            return self.val(e.first, 0) if t == 0 else self.val(e.rest, t - 1)
        if isinstance(e, A.If):
            c = self.val(e.cond, t)
            if c is EOD:
                return EOD
            return self.val(e.then, t) if c else self.val(e.orelse, t)
        if isinstance(e, A.Compare):
            if e.op in ("==", "!=") and (isinstance(e.lhs, A.EodLit) or isinstance(e.rhs, A.EodLit)):
                other = e.rhs if isinstance(e.lhs, A.EodLit) else e.lhs
                is_eod = self.val(other, t) is EOD
                return is_eod if e.op == "==" else not is_eod
            a, b = self.val(e.lhs, t), self.val(e.rhs, t)
            if a is EOD or b is EOD:
                return EOD
            return {"<": lambda: a < b, "<=": lambda: a <= b, ">": lambda: a > b,
                    ">=": lambda: a >= b, "==": lambda: _eq(a, b),
                    "!=": lambda: not _eq(a, b)}[e.op]()
        if isinstance(e, A.Binary):
            a, b = self.val(e.lhs, t), self.val(e.rhs, t)
            if a is EOD or b is EOD:
                return EOD
            return _arith(e.op, a, b, e.ty)
        if isinstance(e, A.Neg):
            a = self.val(e.operand, t)
            if a is EOD:
                return EOD
            return _f32(-a) if e.ty == FLOAT else _i32(-a)
        if isinstance(e, A.ListLit):
            vals = tuple(self.val(x, t) for x in e.elements)
            return EOD if any(v is EOD for v in vals) else vals
        if isinstance(e, A.Tl):
            a = self.val(e.operand, t)
            return EOD if a is EOD else a[1:]
        if isinstance(e, A.Concat):
            a, b = self.val(e.lhs, t), self.val(e.rhs, t)
            return EOD if a is EOD or b is EOD else a + b
        if isinstance(e, A.At):
            a = self.val(e.operand, t)
            return EOD if a is EOD else a[e.index]
        raise TypeError(type(e).__name__)


class _Reference:
    def __init__(self, typed: TypedProgram, limit: int):
        self.typed = typed
        self.limit = limit

    def filter_stream(self, decl: A.FilterDecl, args: dict[str, list]) -> _Stream:
        local, anywhere = [], set()
        for eq in decl.equations:
            _locals(eq.rhs, local)
            anywhere.update(x.name for x in A.walk(eq.rhs) if isinstance(x, A.Ref))
        consumed = {p.name: args[p.name] for p in decl.params
                    if p.name in local or p.name not in anywhere}
        eqs = {eq.lhs: self._lift_calls(eq.rhs, args, consumed) for eq in decl.equations}
        s = _Stream(self, eqs, decl.name, decl.output_type, consumed)
        s.run(self.limit)
        return s

    def _lift_calls(self, e: A.Expr, args, consumed) -> A.Expr:
        """Evaluate each call site to a stream and replace it by a reference."""
        if isinstance(e, A.Call):
            callee = self.typed.decl(e.func)
            cargs = {p.name: self.arg_stream(a, args) for p, a in zip(callee.params, e.args)}
            name = f"{e.func}@{len([k for k in consumed if '@' in k])}"
            consumed[name] = self.filter_stream(callee, cargs).values
            return A.Ref(name, e.span, e.ty)
        return A.map_children(e, lambda c: self._lift_calls(c, args, consumed))

    def arg_stream(self, arg: A.Expr, args: dict[str, list]) -> list:
        if isinstance(arg, A.Ref) and arg.name in args:
            return args[arg.name]
        if isinstance(arg, A.Call):
            callee = self.typed.decl(arg.func)
            cargs = {p.name: self.arg_stream(a, args) for p, a in zip(callee.params, arg.args)}
            return self.filter_stream(callee, cargs).values
        local: list[str] = []
        _locals(arg, local)
        consumed = {n: args[n] for n in local}
        rhs = self._lift_calls(arg, args, consumed)
        s = _Stream(self, {"@out": rhs}, "@out", arg.ty, consumed)
        return s.run(self.limit)


def _locals(e: A.Expr, acc: list[str]) -> None:
    if isinstance(e, A.Ref):
        if e.name not in acc:
            acc.append(e.name)
    elif not isinstance(e, A.Call):
        for c in e.children():
            _locals(c, acc)


def _reachable(typed: TypedProgram, top: str) -> list[A.FilterDecl]:
    seen, todo = [], [top]
    while todo:
        n = todo.pop()
        if n in seen:
            continue
        seen.append(n)
        for eq in typed.decl(n).equations:
            todo.extend(x.func for x in A.walk(eq.rhs) if isinstance(x, A.Call))
    return [typed.decl(n) for n in seen]


def eval_reference(typed: TypedProgram, top: str, inputs: Mapping[str, list],
                   n_quanta: int) -> dict[str, list]:
    """Streams of ``top`` for at most ``n_quanta`` quanta.

    Returns a mapping holding every input stream (values then one EOD), the
    output stream under ``top``'s name (cut after its first EOD, or where an
    input runs out) and ``top``'s internal sequences under their own names.
    """
    decl = typed.decl(top)
    for d in _reachable(typed, top):
        if has_silent_path(d):
            raise ReferenceRefused(f"filter '{d.name}' may emit nothing on some quanta")
    streams = {}
    for p in decl.params:
        vals = []
        for v in inputs[p.name]:
            if v is EOD:
                break
            vals.append(_to_host(v, p.type))
        streams[p.name] = vals + [EOD]
    ref = _Reference(typed, n_quanta)
    s = ref.filter_stream(decl, dict(streams))
    out = dict(streams)
    out[top] = list(s.values)
    for name, vals in s.seq_values.items():
        if "@" not in name:
            out[name] = vals
    return out


__all__ = ["eval_reference", "ReferenceRefused", "ReferenceFault"]
