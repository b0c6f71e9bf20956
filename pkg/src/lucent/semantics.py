"""Name resolution, type checking and causality analysis."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .diagnostics import Diagnostic, LucentError, error
from .types import BOOL, FLOAT, INT, ListOf, Type, is_numeric

PARAM = "parameter"
SEQUENCE = "internal sequence"
OUTPUT = "output"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str
    type: Type


@dataclass
class SymbolTable:
    filters: dict[str, A.FilterDecl]
    locals: dict[str, dict[str, Symbol]]

    def lookup(self, filter_name: str, name: str) -> Optional[Symbol]:
        return self.locals[filter_name].get(name)


@dataclass
class TypedProgram:
    """A program whose every expression node carries its type in ``ty``."""

    program: A.Program
    symbols: SymbolTable
    # filter -> lhs -> sequence names referenced without delay
    deps: dict[str, dict[str, tuple[str, ...]]]
    # filters whose output equation refers to their own output
    self_referential: frozenset[str]
    # filter -> internal sequences in evaluation order; set by check_causality
    order: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def decl(self, name: str) -> A.FilterDecl:
        return self.symbols.filters[name]

    @property
    def decls(self) -> tuple[A.FilterDecl, ...]:
        return self.program.decls


# -- resolution

def resolve(program: A.Program) -> SymbolTable:
    diags: list[Diagnostic] = []
    filters = {d.name: d for d in program.decls}
    owners: dict[str, str] = {}
    for d in program.decls:
        for eq in d.sequences:
            owners.setdefault(eq.lhs, d.name)

    table: dict[str, dict[str, Symbol]] = {}
    for d in program.decls:
        syms: dict[str, Symbol] = {}
        for p in d.params:
            if p.name in syms:
                diags.append(error("R004", f"duplicate parameter '{p.name}'", p.span))
            syms[p.name] = Symbol(p.name, PARAM, p.type)
        n_out = 0
        for eq in d.equations:
            if eq.lhs == d.name:
                n_out += 1
                if n_out > 1:
                    diags.append(error("R005", f"output '{d.name}' is defined more than once", eq.span))
                continue
            if eq.lhs in syms:
                what = "parameter" if syms[eq.lhs].kind == PARAM else "sequence"
                diags.append(error("R005", f"'{eq.lhs}' redefines an existing {what}", eq.span))
                continue
            if eq.declared_type is None:
                diags.append(error("R006", f"internal sequence '{eq.lhs}' needs a type annotation",
                                   eq.span))
                continue
            syms[eq.lhs] = Symbol(eq.lhs, SEQUENCE, eq.declared_type)
        if d.name in syms:
            diags.append(error("R005", f"'{d.name}' is both the filter output and a {syms[d.name].kind}",
                               d.span))
        if n_out == 0:
            diags.append(error("R007", f"filter '{d.name}' has no output equation '{d.name} = ...'",
                               d.span))
        syms[d.name] = Symbol(d.name, OUTPUT, d.output_type)
        table[d.name] = syms

        for eq in d.equations:
            for e in A.walk(eq.rhs):
                if isinstance(e, A.Ref):
                    if e.name in syms:
                        continue
                    if e.name in filters:
                        diags.append(error("R002", f"filter '{e.name}' used as a stream; call it instead",
                                           e.span))
                    elif e.name in owners:
                        diags.append(error("R003", f"reference to internal sequence '{e.name}' of "
                                                   f"filter '{owners[e.name]}'", e.span))
                    else:
                        diags.append(error("R001", f"unknown identifier {e.name}", e.span))
                elif isinstance(e, A.Call):
                    target = filters.get(e.func)
                    if target is None:
                        diags.append(error("R001", f"unknown filter {e.func}", e.span))
                    elif len(target.params) != len(e.args):
                        diags.append(error("R008", f"filter '{e.func}' takes {len(target.params)} "
                                                   f"argument(s), {len(e.args)} given", e.span))
    if diags:
        raise LucentError(diags)
    return SymbolTable(filters, table)


# -- type checking

class _TypeError(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


def _fail(code: str, msg: str, e: A.Expr):
    raise _TypeError(error(code, msg, A.span_of(e)))


class _Checker:
    def __init__(self, symbols: SymbolTable, decl: A.FilterDecl):
        self.symbols = symbols
        self.decl = decl
        self.locals = symbols.locals[decl.name]

    def check(self, e: A.Expr, expected: Type, output_pos: bool = False) -> A.Expr:
        """Check ``e`` against ``expected`` in a stream-value position (EOD allowed)."""
        if isinstance(e, A.EodLit):
            return A.rebuild(e, ty=expected)
        if isinstance(e, A.If):
            return self.check_if(e, expected, output_pos)
        if isinstance(e, A.Fby):
            first = self.check(e.first, expected)
            rest = self.check(e.rest, expected)
            return A.rebuild(e, first=first, rest=rest, ty=expected)
        out = self.infer(e)
        if out.ty != expected:
            _fail("T001", f"type mismatch: expected {expected}, found {out.ty}", e)
        return out

    def check_if(self, e: A.If, expected: Optional[Type], output_pos: bool) -> A.If:
        cond = self.infer(e.cond)
        if cond.ty != BOOL:
            _fail("T002", f"condition must be bool, found {cond.ty}", e.cond)
        if e.orelse is None and not output_pos:
            _fail("T009", "conditional without 'else' is only allowed as the filter output", e)
        if expected is None:
            if isinstance(e.then, A.EodLit) and e.orelse is not None and not isinstance(e.orelse, A.EodLit):
                orelse = self.infer(e.orelse, output_pos)
                expected = orelse.ty
                then = self.check(e.then, expected, output_pos)
            else:
                then = self.infer(e.then, output_pos)
                expected = then.ty
                orelse = self.check(e.orelse, expected, output_pos) if e.orelse is not None else None
        else:
            then = self.check(e.then, expected, output_pos)
            orelse = self.check(e.orelse, expected, output_pos) if e.orelse is not None else None
        return A.rebuild(e, cond=cond, then=then, orelse=orelse, ty=expected)

    def infer(self, e: A.Expr, output_pos: bool = False) -> A.Expr:
        if isinstance(e, A.IntLit):
            return A.rebuild(e, ty=INT)
        if isinstance(e, A.FloatLit):
            return A.rebuild(e, ty=FLOAT)
        if isinstance(e, A.EodLit):
            _fail("T003", "EOD is only allowed where a stream value is expected "
                          "(equation, branch, fby operand, argument or '== EOD')", e)
        if isinstance(e, A.Ref):
            return A.rebuild(e, ty=self.locals[e.name].type)
        if isinstance(e, A.ListLit):
            elems = [self.infer(x) for x in e.elements]
            t = elems[0].ty
            for x in elems[1:]:
                if x.ty != t:
                    _fail("T004", f"list elements disagree: {t} and {x.ty}", x)
            return A.rebuild(e, elements=tuple(elems), ty=ListOf(t, len(elems)))
        if isinstance(e, A.Neg):
            x = self.infer(e.operand)
            if not is_numeric(x.ty):
                _fail("T005", f"unary '-' needs int or float, found {x.ty}", e)
            return A.rebuild(e, operand=x, ty=x.ty)
        if isinstance(e, A.Binary):
            lhs, rhs = self.infer(e.lhs), self.infer(e.rhs)
            for side in (lhs, rhs):
                if not is_numeric(side.ty):
                    _fail("T005", f"operator '{e.op}' needs int or float operands, found {side.ty}", side)
            if lhs.ty != rhs.ty:
                _fail("T006", f"mixed numeric types {lhs.ty} and {rhs.ty} in '{e.op}'", e)
            return A.rebuild(e, lhs=lhs, rhs=rhs, ty=lhs.ty)
        if isinstance(e, A.Compare):
            l_eod, r_eod = isinstance(e.lhs, A.EodLit), isinstance(e.rhs, A.EodLit)
            if (l_eod or r_eod) and e.op in ("==", "!="):
                if l_eod and r_eod:
                    _fail("T003", "cannot compare EOD with EOD", e)
                other = self.infer(e.rhs if l_eod else e.lhs)
                eod = A.rebuild(e.lhs if l_eod else e.rhs, ty=other.ty)
                lhs, rhs = (eod, other) if l_eod else (other, eod)
                return A.rebuild(e, lhs=lhs, rhs=rhs, ty=BOOL)
            lhs, rhs = self.infer(e.lhs), self.infer(e.rhs)
            if e.op in ("==", "!="):
                if lhs.ty != rhs.ty:
                    _fail("T006", f"cannot compare {lhs.ty} with {rhs.ty}", e)
            else:
                if not is_numeric(lhs.ty) or lhs.ty != rhs.ty:
                    _fail("T006", f"'{e.op}' needs two int or two float operands, "
                                  f"found {lhs.ty} and {rhs.ty}", e)
            return A.rebuild(e, lhs=lhs, rhs=rhs, ty=BOOL)
        if isinstance(e, A.Fby):
            if isinstance(e.first, A.EodLit):
                rest = self.infer(e.rest)
                return self.check(e, rest.ty)
            first = self.infer(e.first)
            rest = self.check(e.rest, first.ty)
            return A.rebuild(e, first=first, rest=rest, ty=first.ty)
        if isinstance(e, A.If):
            return self.check_if(e, None, output_pos)
        if isinstance(e, A.Call):
            target = self.symbols.filters[e.func]
            args = tuple(self.check(a, p.type) for a, p in zip(e.args, target.params))
            return A.rebuild(e, args=args, ty=target.output_type)
        if isinstance(e, A.Tl):
            x = self.infer(e.operand)
            if not isinstance(x.ty, ListOf):
                _fail("T007", f"tl needs a list, found {x.ty}", e)
            if x.ty.length < 2:
                _fail("T007", f"tl of a list of length {x.ty.length} would be empty", e)
            return A.rebuild(e, operand=x, ty=ListOf(x.ty.elem, x.ty.length - 1))
        if isinstance(e, A.Concat):
            lhs, rhs = self.infer(e.lhs), self.infer(e.rhs)
            for side in (lhs, rhs):
                if not isinstance(side.ty, ListOf):
                    _fail("T007", f"'::' needs list operands, found {side.ty}", side)
            if lhs.ty.elem != rhs.ty.elem:
                _fail("T007", f"'::' element types differ: {lhs.ty.elem} and {rhs.ty.elem}", e)
            return A.rebuild(e, lhs=lhs, rhs=rhs, ty=ListOf(lhs.ty.elem, lhs.ty.length + rhs.ty.length))
        if isinstance(e, A.At):
            x = self.infer(e.operand)
            if not isinstance(x.ty, ListOf):
                _fail("T007", f"at needs a list, found {x.ty}", e)
            if not 0 <= e.index < x.ty.length:
                _fail("T008", f"index {e.index} out of bounds for length {x.ty.length}", e)
            return A.rebuild(e, operand=x, ty=x.ty.elem)
        raise TypeError(type(e).__name__)


def delayed_refs(e: A.Expr, delayed: bool = False):
    """Yield (Ref, is_delayed) for every Ref; operands of a fby's ``rest`` are delayed."""
    if isinstance(e, A.Ref):
        yield e, delayed
    elif isinstance(e, A.Fby):
        yield from delayed_refs(e.first, delayed)
        yield from delayed_refs(e.rest, True)
    else:
        for c in e.children():
            yield from delayed_refs(c, delayed)


def typecheck(program: A.Program, symbols: SymbolTable) -> TypedProgram:
    diags: list[Diagnostic] = []
    decls = []
    deps: dict[str, dict[str, tuple[str, ...]]] = {}
    self_ref = set()
    for d in program.decls:
        checker = _Checker(symbols, d)
        eqs = []
        for eq in d.equations:
            is_out = eq.lhs == d.name
            expected = d.output_type if is_out else eq.declared_type
            try:
                rhs = checker.check(eq.rhs, expected, output_pos=is_out)
            except _TypeError as exc:
                diags.append(exc.diag)
                continue
            eqs.append(A.Equation(eq.lhs, eq.declared_type, rhs, eq.span))
        decls.append(A.FilterDecl(d.name, d.external, d.output_type, d.params, tuple(eqs), d.span))
        graph = {}
        locs = symbols.locals[d.name]
        for eq in d.equations:
            edges = []
            for ref, delayed in delayed_refs(eq.rhs):
                if ref.name == d.name:
                    self_ref.add(d.name)
                    continue
                sym = locs.get(ref.name)
                if not delayed and sym is not None and sym.kind == SEQUENCE and ref.name not in edges:
                    edges.append(ref.name)
            graph[eq.lhs] = tuple(edges)
        deps[d.name] = graph
    if diags:
        raise LucentError(diags)
    typed_prog = A.Program(tuple(decls), program.file)
    typed_symbols = SymbolTable({d.name: d for d in decls}, symbols.locals)
    return TypedProgram(typed_prog, typed_symbols, deps, frozenset(self_ref))


# -- causality

def _find_cycle(graph: dict[str, tuple[str, ...]], roots) -> Optional[list[str]]:
    state: dict[str, int] = {}
    path: list[str] = []

    def visit(n):
        state[n] = 1
        path.append(n)
        for m in graph.get(n, ()):
            if state.get(m) == 1:
                return path[path.index(m):] + [m]
            if m not in state:
                cyc = visit(m)
                if cyc:
                    return cyc
        path.pop()
        state[n] = 2
        return None

    for r in roots:
        if r not in state:
            cyc = visit(r)
            if cyc:
                return cyc
    return None


def _topo(graph: dict[str, tuple[str, ...]], roots) -> list[str]:
    order: list[str] = []
    seen = set()

    def visit(n):
        seen.add(n)
        for m in graph.get(n, ()):
            if m not in seen:
                visit(m)
        order.append(n)

    for r in roots:
        if r not in seen:
            visit(r)
    return order


def check_causality(typed: TypedProgram) -> dict[str, tuple[str, ...]]:
    """Reject instantaneous cycles and recursive calls.

    Returns, per filter, its internal sequences in an order where every
    sequence follows the sequences it needs in the same quantum.  The result
    is also stored on ``typed.order``.
    """
    diags: list[Diagnostic] = []
    orders = {}
    for d in typed.decls:
        graph = typed.deps[d.name]
        names = [eq.lhs for eq in d.equations]
        cyc = _find_cycle(graph, names)
        if cyc:
            eq = next(q for q in d.equations if q.lhs == cyc[0])
            diags.append(error("C001", "instantaneous cycle: " + " → ".join(cyc), eq.span))
            continue
        seqs = [n for n in _topo(graph, names) if n != d.name]
        orders[d.name] = tuple(seqs)

    calls: dict[str, tuple[str, ...]] = {}
    for d in typed.decls:
        callees = []
        for eq in d.equations:
            for e in A.walk(eq.rhs):
                if isinstance(e, A.Call) and e.func not in callees:
                    callees.append(e.func)
        calls[d.name] = tuple(callees)
    reported = set()
    for d in typed.decls:
        cyc = _find_cycle(calls, [d.name])
        if cyc and frozenset(cyc) not in reported:
            reported.add(frozenset(cyc))
            diags.append(error("C002", "recursive filter call: " + " → ".join(cyc), d.span))
    if diags:
        raise LucentError(diags)
    typed.order = orders
    return orders


def analyze(program: A.Program) -> TypedProgram:
    """resolve, typecheck and check_causality in sequence."""
    symbols = resolve(program)
    typed = typecheck(program, symbols)
    check_causality(typed)
    return typed


def has_silent_path(decl: A.FilterDecl) -> bool:
    """True if the output equation contains an else-less conditional."""
    return any(isinstance(e, A.If) and e.orelse is None for e in A.walk(decl.output_equation.rhs))
