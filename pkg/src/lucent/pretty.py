"""Canonical source printer.  Conditionals are always printed in inline form."""
from __future__ import annotations

from . import ast as A

# binding strength; higher binds tighter
_FBY, _CMP, _CONCAT, _ADD, _MUL, _UNARY, _ATOM = range(7)


def _level(e: A.Expr) -> int:
    if isinstance(e, A.Fby):
        return _FBY
    if isinstance(e, A.Compare):
        return _CMP
    if isinstance(e, A.Concat):
        return _CONCAT
    if isinstance(e, A.Binary):
        return _ADD if e.op in "+-" else _MUL
    if isinstance(e, A.Neg):
        return _UNARY
    return _ATOM


def _wrap(e: A.Expr, min_level: int) -> str:
    s = pretty_expr(e)
    return f"({s})" if _level(e) < min_level else s


def pretty_expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.FloatLit):
        return e.text
    if isinstance(e, A.EodLit):
        return "EOD"
    if isinstance(e, A.Ref):
        return e.name
    if isinstance(e, A.ListLit):
        return "[" + ", ".join(pretty_expr(x) for x in e.elements) + "]"
    if isinstance(e, A.Neg):
        return "-" + _wrap(e.operand, _UNARY)
    if isinstance(e, A.Binary):
        lvl = _level(e)
        return f"{_wrap(e.lhs, lvl)} {e.op} {_wrap(e.rhs, lvl + 1)}"
    if isinstance(e, A.Compare):
        return f"{_wrap(e.lhs, _CONCAT)} {e.op} {_wrap(e.rhs, _CONCAT)}"
    if isinstance(e, A.Concat):
        return f"{_wrap(e.lhs, _ADD)} :: {_wrap(e.rhs, _CONCAT)}"
    if isinstance(e, A.Fby):
        return f"{_wrap(e.first, _CMP)} fby {_wrap(e.rest, _FBY)}"
    if isinstance(e, A.If):
        s = f"if ({pretty_expr(e.cond)}) then {pretty_expr(e.then)}"
        if e.orelse is not None:
            s += f" else {pretty_expr(e.orelse)}"
        return s + " fi"
    if isinstance(e, A.Call):
        return f"{e.func}(" + ", ".join(pretty_expr(a) for a in e.args) + ")"
    if isinstance(e, A.Tl):
        return f"tl({pretty_expr(e.operand)})"
    if isinstance(e, A.At):
        return f"at({pretty_expr(e.operand)}, {e.index})"
    raise TypeError(f"cannot print {type(e).__name__}")


def pretty_program(prog: A.Program) -> str:
    out = []
    for d in prog.decls:
        params = ", ".join(f"{p.name}:{p.type}" for p in d.params)
        kw = "external" if d.external else "filter"
        out.append(f"{kw} {d.name}:{d.output_type}({params}) where:")
        for eq in d.equations:
            ann = f":{eq.declared_type}" if eq.declared_type is not None else ""
            out.append(f"    {eq.lhs}{ann} = {pretty_expr(eq.rhs)}")
        out.append("")
    return "\n".join(out)
