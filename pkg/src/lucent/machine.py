"""Elaboration of a typed program into an explicit dataflow machine.

Instance ids are handed out in pre-order over call expressions, starting
with the top filter (id 0).  A callee's id is reserved before its argument
subtrees are visited; calls inside a callee's own body are numbered after
its arguments.  Duplicators are numbered last, in order of the stream they
copy.

Port rules for a filter instance:

* one input port per parameter read directly by the filter's equations
  (outside call arguments), plus one for any parameter used nowhere, so the
  instance stays clocked by that stream;
* parameters only forwarded into calls get no port; the stream is routed
  straight to the callee;
* one input port ``callee@k`` per call site in the body, carrying the
  callee's output stream;
* a single output port ``out``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ast as A
from .diagnostics import Diagnostic, LucentError, SourceSpan, error
from .semantics import TypedProgram, check_causality
from .types import Type

FILTER = "filter"
PASSTHROUGH = "passthrough"
DUPLICATOR = "duplicator"

PASS_OUTPUT = "@out"
MACHINE_SPAN = SourceSpan("<machine>", 1, 1, 1, 1)


@dataclass(frozen=True)
class Port:
    name: str
    type: Type


@dataclass(frozen=True)
class Instance:
    id: int
    kind: str
    name: str
    external: bool
    inputs: tuple[Port, ...]
    outputs: tuple[Port, ...]
    params: tuple[Port, ...] = ()
    output_name: str = ""
    equations: tuple[A.Equation, ...] = ()
    order: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        return f"{self.name}#{self.id}"

    @property
    def output_type(self) -> Type:
        return self.outputs[0].type

    @property
    def output_equation(self) -> Optional[A.Equation]:
        for eq in self.equations:
            if eq.lhs == self.output_name:
                return eq
        return None

    def input_port(self, name: str) -> Optional[Port]:
        for p in self.inputs:
            if p.name == name:
                return p
        return None

    def output_port(self, name: str) -> Optional[Port]:
        for p in self.outputs:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Endpoint:
    instance: Optional[int]  # None: the machine boundary
    port: str

    def __str__(self) -> str:
        return f"${self.port}" if self.instance is None else f"{self.instance}.{self.port}"


@dataclass(frozen=True)
class Channel:
    id: int
    src: Endpoint
    dst: Endpoint
    type: Type


@dataclass(frozen=True)
class DataflowMachine:
    top_name: str
    instances: tuple[Instance, ...]
    channels: tuple[Channel, ...]
    inputs: tuple[Port, ...]
    output: Port

    def instance(self, iid: int) -> Instance:
        for inst in self.instances:
            if inst.id == iid:
                return inst
        raise KeyError(iid)

    @property
    def top(self) -> Optional[Instance]:
        for ch in self.channels:
            if ch.dst.instance is None and ch.src.instance is not None:
                return self.instance(ch.src.instance)
        return None

    def interior_channels(self) -> tuple[Channel, ...]:
        return tuple(c for c in self.channels
                     if c.src.instance is not None and c.dst.instance is not None)

    def summary(self) -> dict[str, int]:
        kinds = [i.kind for i in self.instances]
        return {
            "instances": len(kinds),
            "filters": kinds.count(FILTER),
            "passthroughs": kinds.count(PASSTHROUGH),
            "duplicators": kinds.count(DUPLICATOR),
            "channels": len(self.channels),
            "interior_channels": len(self.interior_channels()),
        }

    def topological_order(self) -> list[int]:
        """Instance ids, producers before consumers; ties by ascending id."""
        indeg = {i.id: 0 for i in self.instances}
        succ: dict[int, list[int]] = {i.id: [] for i in self.instances}
        for c in self.channels:
            if c.src.instance is not None and c.dst.instance is not None:
                succ[c.src.instance].append(c.dst.instance)
                indeg[c.dst.instance] += 1
        ready = sorted(i for i, d in indeg.items() if d == 0)
        out = []
        while ready:
            n = ready.pop(0)
            out.append(n)
            for m in succ[n]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
                    ready.sort()
        return out


def _local_refs(e: A.Expr, acc: list[str]) -> None:
    """Names referenced by ``e`` outside call arguments, in first-use order."""
    if isinstance(e, A.Ref):
        if e.name not in acc:
            acc.append(e.name)
    elif not isinstance(e, A.Call):
        for c in e.children():
            _local_refs(c, acc)


class _Elaborator:
    def __init__(self, typed: TypedProgram):
        self.typed = typed
        self.next_id = 0
        self.built: dict[int, Instance] = {}
        self.links: list[tuple[Endpoint, Endpoint]] = []
        self.src_types: dict[Endpoint, Type] = {}

    def reserve(self) -> int:
        iid = self.next_id
        self.next_id += 1
        return iid

    def connect(self, src: Endpoint, dst: Endpoint, ty: Type) -> None:
        self.src_types.setdefault(src, ty)
        self.links.append((src, dst))

    def call(self, call: A.Call, sources: dict[str, Endpoint]) -> Endpoint:
        iid = self.reserve()
        decl = self.typed.decl(call.func)
        arg_sources = {p.name: self.argument(a, sources) for p, a in zip(decl.params, call.args)}
        self.build_filter(iid, decl, arg_sources)
        return Endpoint(iid, "out")

    def argument(self, arg: A.Expr, sources: dict[str, Endpoint]) -> Endpoint:
        if isinstance(arg, A.Ref) and arg.name in sources:
            return sources[arg.name]
        if isinstance(arg, A.Call):
            return self.call(arg, sources)
        return self.passthrough(arg, sources)

    def rewrite_calls(self, iid: int, e: A.Expr, sources, inputs: list[Port]) -> A.Expr:
        if isinstance(e, A.Call):
            src = self.call(e, sources)
            k = sum(1 for p in inputs if "@" in p.name)
            port = Port(f"{e.func}@{k}", e.ty)
            inputs.append(port)
            self.connect(src, Endpoint(iid, port.name), e.ty)
            return A.Ref(port.name, e.span, e.ty)
        return A.map_children(e, lambda c: self.rewrite_calls(iid, c, sources, inputs))

    def build_filter(self, iid: int, decl: A.FilterDecl, sources: dict[str, Endpoint]) -> None:
        local: list[str] = []
        anywhere = set()
        for eq in decl.equations:
            _local_refs(eq.rhs, local)
            anywhere.update(e.name for e in A.walk(eq.rhs) if isinstance(e, A.Ref))
        inputs: list[Port] = []
        for p in decl.params:
            if p.name in local or p.name not in anywhere:
                inputs.append(Port(p.name, p.type))
                self.connect(sources[p.name], Endpoint(iid, p.name), p.type)
        ordered = [decl.output_equation] + list(decl.sequences)
        rewritten = {eq.lhs: A.Equation(eq.lhs, eq.declared_type,
                                        self.rewrite_calls(iid, eq.rhs, sources, inputs), eq.span)
                     for eq in ordered}
        self.built[iid] = Instance(
            id=iid, kind=FILTER, name=decl.name, external=decl.external,
            inputs=tuple(inputs), outputs=(Port("out", decl.output_type),),
            params=tuple(Port(p.name, p.type) for p in decl.params),
            output_name=decl.name,
            equations=tuple(rewritten[eq.lhs] for eq in decl.equations),
            order=self.typed.order.get(decl.name, ()),
        )

    def passthrough(self, arg: A.Expr, sources: dict[str, Endpoint]) -> Endpoint:
        iid = self.reserve()
        local: list[str] = []
        _local_refs(arg, local)
        inputs: list[Port] = []
        for name in local:
            if name not in sources:
                ref = next(e for e in A.walk(arg) if isinstance(e, A.Ref) and e.name == name)
                raise LucentError([error(
                    "E003", f"argument expression refers to '{name}'; arguments may only use "
                            "parameters, calls and literals", ref.span)])
            ref = next(e for e in A.walk(arg) if isinstance(e, A.Ref) and e.name == name)
            inputs.append(Port(name, ref.ty))
            self.connect(sources[name], Endpoint(iid, name), ref.ty)
        rhs = self.rewrite_calls(iid, arg, sources, inputs)
        self.built[iid] = Instance(
            id=iid, kind=PASSTHROUGH, name="pass", external=False,
            inputs=tuple(inputs), outputs=(Port("out", arg.ty),),
            output_name=PASS_OUTPUT,
            equations=(A.Equation(PASS_OUTPUT, None, rhs, arg.span),),
        )
        return Endpoint(iid, "out")

    def finish(self, top: A.FilterDecl) -> DataflowMachine:
        groups: dict[Endpoint, list[Endpoint]] = {}
        for src, dst in self.links:
            groups.setdefault(src, []).append(dst)
        channels: list[Channel] = []

        def chan(src, dst, ty):
            channels.append(Channel(len(channels), src, dst, ty))

        for src, dsts in groups.items():
            ty = self.src_types[src]
            if len(dsts) == 1:
                chan(src, dsts[0], ty)
                continue
            did = self.reserve()
            outs = tuple(Port(f"out{j}", ty) for j in range(len(dsts)))
            self.built[did] = Instance(id=did, kind=DUPLICATOR, name="dup", external=False,
                                       inputs=(Port("in", ty),), outputs=outs)
            chan(src, Endpoint(did, "in"), ty)
            for port, dst in zip(outs, dsts):
                chan(Endpoint(did, port.name), dst, ty)
        instances = tuple(self.built[i] for i in sorted(self.built))
        return DataflowMachine(
            top_name=top.name,
            instances=instances,
            channels=tuple(channels),
            inputs=tuple(Port(p.name, p.type) for p in top.params),
            output=Port(top.name, top.output_type),
        )


def elaborate(typed: TypedProgram, top: str) -> DataflowMachine:
    """Instantiate the call tree under external filter ``top``."""
    decl = typed.symbols.filters.get(top)
    if decl is None or not decl.external:
        span = decl.span if decl is not None else MACHINE_SPAN
        raise LucentError([error("E001", f"no external filter named {top}", span)])
    if not typed.order and typed.decls:
        check_causality(typed)
    el = _Elaborator(typed)
    iid = el.reserve()
    sources = {p.name: Endpoint(None, p.name) for p in decl.params}
    el.build_filter(iid, decl, sources)
    el.connect(Endpoint(iid, "out"), Endpoint(None, decl.name), decl.output_type)
    return el.finish(decl)


def default_top(typed: TypedProgram) -> str:
    externals = [d.name for d in typed.decls if d.external]
    if len(externals) == 1:
        return externals[0]
    span = typed.decls[0].span if typed.decls else MACHINE_SPAN
    if not externals:
        raise LucentError([error("E001", "program declares no external filter", span)])
    raise LucentError([error("E002", "several external filters (" + ", ".join(externals)
                             + "); choose one with --top", span)])


def validate(machine: DataflowMachine) -> None:
    """Check the structural invariants of ``machine``; raises LucentError."""
    diags: list[Diagnostic] = []

    def bad(code, msg):
        diags.append(error(code, msg, MACHINE_SPAN))

    if not machine.instances:
        bad("M001", "machine has no top instance")
        raise LucentError(diags)
    ids = [i.id for i in machine.instances]
    if len(set(ids)) != len(ids):
        bad("M002", "instance ids are not unique")
    by_id = {i.id: i for i in machine.instances}

    incoming: dict[Endpoint, list[int]] = {}
    outgoing: dict[Endpoint, list[int]] = {}
    for c in machine.channels:
        outgoing.setdefault(c.src, []).append(c.id)
        incoming.setdefault(c.dst, []).append(c.id)
        for end, side in ((c.src, "source"), (c.dst, "destination")):
            if end.instance is None:
                pool = machine.inputs if side == "source" else (machine.output,)
                port = next((p for p in pool if p.name == end.port), None)
            else:
                inst = by_id.get(end.instance)
                if inst is None:
                    bad("M003", f"channel {c.id}: {side} refers to unknown instance {end.instance}")
                    continue
                port = inst.output_port(end.port) if side == "source" else inst.input_port(end.port)
            if port is None:
                bad("M003", f"channel {c.id}: {side} port {end} does not exist")
            elif port.type != c.type:
                a, b = (port.type, c.type) if side == "source" else (c.type, port.type)
                bad("M004", f"channel {c.id}: {a} ≠ {b}")

    for inst in machine.instances:
        for p in inst.inputs:
            n = len(incoming.get(Endpoint(inst.id, p.name), []))
            if n != 1:
                bad("M005", f"input port {inst.label}.{p.name} has {n} incoming channels")
        for p in inst.outputs:
            n = len(outgoing.get(Endpoint(inst.id, p.name), []))
            if n != 1:
                bad("M005", f"output port {inst.label}.{p.name} has {n} outgoing channels")
    for p in machine.inputs:
        n = len(outgoing.get(Endpoint(None, p.name), []))
        if n != 1:
            bad("M005", f"machine input {p.name} has {n} outgoing channels")
    n = len(incoming.get(Endpoint(None, machine.output.name), []))
    if n != 1:
        bad("M005", f"machine output {machine.output.name} has {n} incoming channels")

    top = machine.top
    if top is None:
        bad("M001", "machine has no top instance")
    else:
        if top.name != machine.top_name:
            bad("M006", f"top instance is {top.label}, expected {machine.top_name}")
        if top.kind == FILTER and tuple(top.params) != tuple(machine.inputs):
            bad("M006", "machine inputs do not match the top filter's parameters")
        if top.output_type != machine.output.type:
            bad("M004", f"machine output: {top.output_type} ≠ {machine.output.type}")

    if len(machine.topological_order()) != len(machine.instances):
        bad("M007", "instance graph has a cycle")
    if diags:
        raise LucentError(diags)
