"""Round-based execution of a dataflow machine.

Each round looks at the channel queues as they stood when the round
began; every non-halted instance whose input queues are all non-empty
(and, in bounded mode, whose output queues have room) fires exactly once.
Firings in a round are committed in ascending instance id, so the trace is
the same whether the firings are computed one by one or concurrently.
"""
from __future__ import annotations

import operator
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from . import ast as A
from .diagnostics import SourceSpan
from .machine import DUPLICATOR, Channel, DataflowMachine, Endpoint, Instance
from .types import FLOAT, INT
from .values import CANONICAL_NAN, EOD, SILENT, coerce, conforms, default_value, wrap32

COMPLETED = "completed"
MAX_ROUNDS = "max_rounds"
DEADLOCK = "deadlock"


class InputError(ValueError):
    pass


class RuntimeFault(Exception):
    """A fault raised while firing; ``trace`` holds the partial trace once run() returns it."""

    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.round: Optional[int] = None
        self.instance: Optional[str] = None
        self.trace: Optional[Trace] = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        ctx = ""
        if self.round is not None:
            ctx = f" (round {self.round}, instance {self.instance})"
        return f"{where}runtime fault: {self.message}{ctx}"


class ShapeViolation(RuntimeFault):
    """Checked mode found a value whose shape differs from its static type."""


class _Faulted:
    __slots__ = ("fault",)

    def __init__(self, fault: RuntimeFault):
        self.fault = fault


@dataclass
class InstanceState:
    id: int
    prev_output: object = None
    local_time: int = 0
    registers: dict = field(default_factory=dict)  # id(fby node) -> value
    halted: bool = False


@dataclass(frozen=True)
class TraceEvent:
    round: int
    instance: int
    local_time: int
    consumed: tuple  # ((port, value), ...)
    emission: object  # value, EOD or SILENT
    sequences: tuple = ()  # ((name, value), ...) internal sequences this firing


@dataclass
class Trace:
    events: list[TraceEvent]
    status: str
    output: list
    rounds: int
    inputs: dict[str, list] = field(default_factory=dict)
    stalls: list[tuple[int, int]] = field(default_factory=list)
    labels: dict[int, str] = field(default_factory=dict)

    def events_for(self, iid: int) -> list[TraceEvent]:
        return [e for e in self.events if e.instance == iid]


@dataclass
class RoundReport:
    round: int
    fired: list[int]
    stalled: list[int] = field(default_factory=list)


@dataclass
class EngineState:
    machine: DataflowMachine
    instances: dict[int, InstanceState]
    queues: dict[int, deque]  # channel id -> FIFO
    inputs: dict[str, list]
    channel_depth: Optional[int] = None
    checked: bool = False
    round: int = 0
    events: list[TraceEvent] = field(default_factory=list)
    stalls: list[tuple[int, int]] = field(default_factory=list)
    enqueued: dict[int, int] = field(default_factory=dict)
    dequeued: dict[int, int] = field(default_factory=dict)
    # wiring, derived from the machine
    in_chans: dict[int, list[tuple[str, int]]] = field(default_factory=dict)
    out_chans: dict[int, list[int]] = field(default_factory=dict)
    output_channel: int = -1
    feeder_channels: frozenset = frozenset()

    @property
    def output_tokens(self) -> list:
        return list(self.queues[self.output_channel])

    @property
    def done(self) -> bool:
        q = self.queues[self.output_channel]
        return bool(q) and q[-1] is EOD


def init(machine: DataflowMachine, inputs, channel_depth: Optional[int] = None,
         checked: bool = False) -> EngineState:
    """Prepare a run.  ``inputs`` maps machine input names to finite sequences
    (or is a positional sequence of them); each feeder ends with one EOD."""
    names = [p.name for p in machine.inputs]
    if isinstance(inputs, Mapping):
        missing = [n for n in names if n not in inputs]
        extra = [n for n in inputs if n not in names]
        if missing or extra:
            raise InputError(f"inputs do not match machine inputs {names}: "
                             f"missing {missing}, unexpected {extra}")
        seqs = [inputs[n] for n in names]
    else:
        seqs = list(inputs)
        if len(seqs) != len(names):
            raise InputError(f"machine takes {len(names)} input stream(s), {len(seqs)} given")
    if channel_depth is not None and channel_depth < 1:
        raise InputError("channel depth must be at least 1")

    fed: dict[str, list] = {}
    for port, seq in zip(machine.inputs, seqs):
        vals = []
        for v in seq:
            if v is EOD:
                break
            try:
                vals.append(coerce(v, port.type))
            except TypeError as exc:
                raise InputError(f"input {port.name}: {exc}") from None
        fed[port.name] = vals + [EOD]

    st = EngineState(machine=machine, instances={}, queues={}, inputs=fed,
                     channel_depth=channel_depth, checked=checked)
    for inst in machine.instances:
        prev = default_value(inst.output_type) if inst.kind != DUPLICATOR else None
        st.instances[inst.id] = InstanceState(inst.id, prev)
        st.in_chans[inst.id] = []
        st.out_chans[inst.id] = []
    by_dst: dict[Endpoint, Channel] = {}
    by_src: dict[Endpoint, Channel] = {}
    for ch in machine.channels:
        st.queues[ch.id] = deque()
        st.enqueued[ch.id] = 0
        st.dequeued[ch.id] = 0
        by_dst[ch.dst] = ch
        by_src[ch.src] = ch
    feeders = set()
    for ch in machine.channels:
        if ch.src.instance is None:
            st.queues[ch.id].extend(fed[ch.src.port])
            st.enqueued[ch.id] = len(fed[ch.src.port])
            feeders.add(ch.id)
        if ch.dst.instance is None:
            st.output_channel = ch.id
    st.feeder_channels = frozenset(feeders)
    for inst in machine.instances:
        st.in_chans[inst.id] = [(p.name, by_dst[Endpoint(inst.id, p.name)].id) for p in inst.inputs]
        st.out_chans[inst.id] = [by_src[Endpoint(inst.id, p.name)].id for p in inst.outputs]
    return st


# -- expression evaluation

def _fault_eod_silent(*vals):
    for v in vals:
        if v is SILENT:
            return SILENT
    for v in vals:
        if v is EOD:
            return EOD
    return None


def _int_div(a: int, b: int, span) -> int:
    if b == 0:
        raise RuntimeFault("integer division by zero", span)
    q = abs(a) // abs(b)
    return wrap32(q if (a >= 0) == (b >= 0) else -q)


_FLOAT_OPS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}
_INT_OPS = {"+": operator.add, "-": operator.sub, "*": operator.mul}
_CMP_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def _canon(x: np.float32) -> np.float32:
    # NaN sign and payload differ between platforms; keep one encoding
    return CANONICAL_NAN if x != x else x


def _equal(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_equal(x, y) for x, y in zip(a, b))
    return bool(a == b)


class _Evaluator:
    """Evaluates expressions of one instance at its current firing."""

    def __init__(self, state: InstanceState, env: dict, output_name: str, checked: bool = False):
        self.st = state
        self.env = env
        self.output_name = output_name
        self.checked = checked

    def ev(self, e: A.Expr):
        v = self._ev(e)
        if self.checked and e.ty is not None and not conforms(v, e.ty):
            raise ShapeViolation(f"value {v!r} does not have static type {e.ty}", e.span)
        return v

    def _ev(self, e: A.Expr):
        t = type(e)
        if t is A.Ref:
            if e.name == self.output_name:
                return self.st.prev_output
            v = self.env[e.name]
            if type(v) is _Faulted:
                raise v.fault
            return v
        if t is A.IntLit:
            return e.value
        if t is A.FloatLit:
            return np.float32(e.text)
        if t is A.Binary:
            a, b = self.ev(e.lhs), self.ev(e.rhs)
            special = _fault_eod_silent(a, b)
            if special is not None:
                return special
            if e.ty == INT:
                if e.op == "/":
                    return _int_div(a, b, e.span)
                return wrap32(_INT_OPS[e.op](a, b))
            with np.errstate(all="ignore"):
                return _canon(np.float32(_FLOAT_OPS[e.op](a, b)))
        if t is A.Fby:
            if self.st.local_time == 0:
                return self.ev(e.first)
            v = self.st.registers[id(e)]
            if type(v) is _Faulted:
                raise v.fault
            return v
        if t is A.If:
            c = self.ev(e.cond)
            if c is EOD or c is SILENT:
                return c
            if c:
                return self.ev(e.then)
            if e.orelse is not None:
                return self.ev(e.orelse)
            return SILENT
        if t is A.Compare:
            if e.op in ("==", "!="):
                if type(e.rhs) is A.EodLit or type(e.lhs) is A.EodLit:
                    other = self.ev(e.lhs if type(e.rhs) is A.EodLit else e.rhs)
                    if other is SILENT:
                        return SILENT
                    return (other is EOD) == (e.op == "==")
            a, b = self.ev(e.lhs), self.ev(e.rhs)
            special = _fault_eod_silent(a, b)
            if special is not None:
                return special
            if e.op == "==":
                return _equal(a, b)
            if e.op == "!=":
                return not _equal(a, b)
            return bool(_CMP_OPS[e.op](a, b))
        if t is A.EodLit:
            return EOD
        if t is A.Neg:
            a = self.ev(e.operand)
            if a is EOD or a is SILENT:
                return a
            if e.ty == FLOAT:
                return _canon(np.float32(-a))
            return wrap32(-a)
        if t is A.ListLit:
            vals = [self.ev(x) for x in e.elements]
            special = _fault_eod_silent(*vals)
            return special if special is not None else tuple(vals)
        if t is A.Tl:
            a = self.ev(e.operand)
            if a is EOD or a is SILENT:
                return a
            return a[1:]
        if t is A.Concat:
            a, b = self.ev(e.lhs), self.ev(e.rhs)
            special = _fault_eod_silent(a, b)
            return special if special is not None else a + b
        if t is A.At:
            a = self.ev(e.operand)
            if a is EOD or a is SILENT:
                return a
            return a[e.index]
        if t is A.Call:
            raise RuntimeFault(f"unelaborated call to {e.func}", e.span)
        raise TypeError(t.__name__)


def fby_nodes(exprs) -> list[A.Fby]:
    return [n for e in exprs for n in A.walk(e) if isinstance(n, A.Fby)]


def eval_expr(expr: A.Expr, env: dict, state: InstanceState, output_name: str = "",
              checked: bool = False):
    """Value of ``expr`` at the instance's current firing; registers are not advanced."""
    return _Evaluator(state, env, output_name, checked).ev(expr)


def advance(exprs, env: dict, state: InstanceState, output_name: str = "",
            checked: bool = False) -> None:
    """End-of-firing update: every fby register takes its ``rest`` value of this firing.

    A fault while computing a ``rest`` is stored and only raised if the
    register is read on a later firing.
    """
    ev = _Evaluator(state, env, output_name, checked)
    new = {}
    for node in fby_nodes(exprs):
        try:
            new[id(node)] = ev.ev(node.rest)
        except ShapeViolation:
            raise
        except RuntimeFault as f:
            new[id(node)] = _Faulted(f)
    state.registers = new
    state.local_time += 1


def fire(inst: Instance, consumed: dict, state: InstanceState, checked: bool = False):
    """One firing of ``inst``: returns (emission, sequence values).

    Updates ``state`` in place; the emission is a value, EOD or SILENT.
    """
    if state.halted:
        raise RuntimeFault(f"{inst.label} fired after halting")
    if checked:
        for p in inst.inputs:
            if not conforms(consumed[p.name], p.type):
                raise ShapeViolation(f"{inst.label}.{p.name} received {consumed[p.name]!r}, "
                                     f"expected {p.type}")
    if inst.kind == DUPLICATOR:
        out = consumed["in"]
        seqs = ()
        state.local_time += 1
    else:
        env = dict(consumed)
        ev = _Evaluator(state, env, inst.output_name, checked)
        eqs = {eq.lhs: eq for eq in inst.equations}
        for name in inst.order:
            try:
                env[name] = ev.ev(eqs[name].rhs)
            except RuntimeFault as f:
                if isinstance(f, ShapeViolation):
                    raise
                env[name] = _Faulted(f)
        out = ev.ev(inst.output_equation.rhs)
        seqs = tuple((n, env[n]) for n in inst.order if type(env[n]) is not _Faulted)
        advance([eq.rhs for eq in inst.equations], env, state, inst.output_name, checked)
    if out is EOD:
        state.halted = True
    elif out is not SILENT and inst.kind != DUPLICATOR:
        state.prev_output = out
    return out, seqs


# -- scheduling

def _ready(st: EngineState) -> tuple[list[int], list[int]]:
    ready, stalled = [], []
    for inst in st.machine.instances:
        ist = st.instances[inst.id]
        if ist.halted:
            continue
        if not all(st.queues[c] for _, c in st.in_chans[inst.id]):
            continue
        if st.channel_depth is not None and any(
                len(st.queues[c]) >= st.channel_depth
                for c in st.out_chans[inst.id] if c != st.output_channel):
            stalled.append(inst.id)
            continue
        ready.append(inst.id)
    return ready, stalled


def _compute(st: EngineState, iid: int, consumed: dict):
    inst = st.machine.instance(iid)
    try:
        return fire(inst, consumed, st.instances[iid], st.checked)
    except RuntimeFault as f:
        f.round = st.round
        f.instance = inst.label
        return f


def step(state: EngineState, parallel: bool = False, workers: int = 4) -> RoundReport:
    """Run one scheduler round.  Raises RuntimeFault if a firing faults."""
    st = state
    st.round += 1
    ready, stalled = _ready(st)
    for iid in stalled:
        st.stalls.append((st.round, iid))
    local_times = {iid: st.instances[iid].local_time for iid in ready}
    consumed = {}
    for iid in ready:
        vals = {}
        for port, c in st.in_chans[iid]:
            vals[port] = st.queues[c].popleft()
            st.dequeued[c] += 1
        consumed[iid] = vals
    if parallel and len(ready) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: _compute(st, i, consumed[i]), ready))
    else:
        results = []
        for iid in ready:
            r = _compute(st, iid, consumed[iid])
            results.append(r)
            if isinstance(r, RuntimeFault):
                break
    fired = []
    for iid, res in zip(ready, results):
        if isinstance(res, RuntimeFault):
            raise res
        out, seqs = res
        inst = st.machine.instance(iid)
        st.events.append(TraceEvent(st.round, iid, local_times[iid],
                                    tuple((p.name, consumed[iid][p.name]) for p in inst.inputs),
                                    out, seqs))
        if out is not SILENT:
            for c in st.out_chans[iid]:
                st.queues[c].append(out)
                st.enqueued[c] += 1
        fired.append(iid)
    return RoundReport(st.round, fired, stalled)


def _trace(st: EngineState, status: str) -> Trace:
    return Trace(list(st.events), status, st.output_tokens, st.round,
                 {k: list(v) for k, v in st.inputs.items()}, list(st.stalls),
                 {i.id: i.label for i in st.machine.instances})


def run(state: EngineState, max_rounds: int = 10000, parallel: bool = False) -> Trace:
    """Step until the machine output carries EOD, nothing can fire, or ``max_rounds``."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    while True:
        if state.done:
            return _trace(state, COMPLETED)
        if state.round >= max_rounds:
            return _trace(state, MAX_ROUNDS)
        try:
            report = step(state, parallel=parallel)
        except RuntimeFault as f:
            f.trace = _trace(state, "fault")
            raise
        if state.done:
            return _trace(state, COMPLETED)
        if not report.fired:
            return _trace(state, DEADLOCK)


def simulate(machine: DataflowMachine, inputs, max_rounds: int = 10000, **kw) -> Trace:
    """init + run in one call."""
    parallel = kw.pop("parallel", False)
    return run(init(machine, inputs, **kw), max_rounds, parallel=parallel)


def fifo_balanced(st: EngineState) -> bool:
    """Per channel: dequeued == enqueued - still queued."""
    return all(st.dequeued[c] == st.enqueued[c] - len(q) for c, q in st.queues.items())


__all__ = [
    "COMPLETED", "DEADLOCK", "MAX_ROUNDS", "EngineState", "InputError", "InstanceState",
    "RuntimeFault", "ShapeViolation", "Trace", "TraceEvent", "advance", "eval_expr",
    "fire", "init", "run", "simulate", "step",
]
