"""JSON IR and Graphviz DOT output for elaborated machines."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

from . import ast as A
from .diagnostics import LucentError, SourceSpan, error
from .machine import (DUPLICATOR, PASSTHROUGH, Channel, DataflowMachine, Endpoint, Instance,
                      Port, validate)
from .types import parse_type

IR_VERSION = "1.0.0"
JSON_SPAN = SourceSpan("<json>", 1, 1, 1, 1)


@lru_cache(maxsize=1)
def ir_schema() -> dict:
    text = resources.files("lucent").joinpath("machine-ir.schema.json").read_text("utf-8")
    return json.loads(text)


# -- expressions

def expr_to_json(e: A.Expr) -> dict:
    ty = str(e.ty)
    if isinstance(e, A.IntLit):
        return {"op": "int", "value": e.value, "type": ty}
    if isinstance(e, A.FloatLit):
        return {"op": "float", "text": e.text, "type": ty}
    if isinstance(e, A.EodLit):
        return {"op": "eod", "type": ty}
    if isinstance(e, A.Ref):
        return {"op": "ref", "name": e.name, "type": ty}
    if isinstance(e, A.ListLit):
        return {"op": "list", "elements": [expr_to_json(x) for x in e.elements], "type": ty}
    if isinstance(e, A.Neg):
        return {"op": "neg", "operand": expr_to_json(e.operand), "type": ty}
    if isinstance(e, A.Tl):
        return {"op": "tl", "operand": expr_to_json(e.operand), "type": ty}
    if isinstance(e, A.At):
        return {"op": "at", "operand": expr_to_json(e.operand), "index": e.index, "type": ty}
    if isinstance(e, A.Binary):
        return {"op": "binary", "operator": e.op, "lhs": expr_to_json(e.lhs),
                "rhs": expr_to_json(e.rhs), "type": ty}
    if isinstance(e, A.Compare):
        return {"op": "compare", "operator": e.op, "lhs": expr_to_json(e.lhs),
                "rhs": expr_to_json(e.rhs), "type": ty}
    if isinstance(e, A.Concat):
        return {"op": "concat", "lhs": expr_to_json(e.lhs), "rhs": expr_to_json(e.rhs), "type": ty}
    if isinstance(e, A.Fby):
        return {"op": "fby", "first": expr_to_json(e.first), "rest": expr_to_json(e.rest), "type": ty}
    if isinstance(e, A.If):
        d = {"op": "if", "cond": expr_to_json(e.cond), "then": expr_to_json(e.then), "type": ty}
        if e.orelse is not None:
            d["else"] = expr_to_json(e.orelse)
        return d
    raise TypeError(f"{type(e).__name__} cannot appear in a machine")


def expr_from_json(d: dict) -> A.Expr:
    op, ty = d["op"], parse_type(d["type"])
    if op == "int":
        return A.IntLit(d["value"], ty=ty)
    if op == "float":
        return A.FloatLit(d["text"], ty=ty)
    if op == "eod":
        return A.EodLit(ty=ty)
    if op == "ref":
        return A.Ref(d["name"], ty=ty)
    if op == "list":
        return A.ListLit(tuple(expr_from_json(x) for x in d["elements"]), ty=ty)
    if op == "neg":
        return A.Neg(expr_from_json(d["operand"]), ty=ty)
    if op == "tl":
        return A.Tl(expr_from_json(d["operand"]), ty=ty)
    if op == "at":
        return A.At(expr_from_json(d["operand"]), d["index"], ty=ty)
    if op == "binary":
        return A.Binary(d["operator"], expr_from_json(d["lhs"]), expr_from_json(d["rhs"]), ty=ty)
    if op == "compare":
        return A.Compare(d["operator"], expr_from_json(d["lhs"]), expr_from_json(d["rhs"]), ty=ty)
    if op == "concat":
        return A.Concat(expr_from_json(d["lhs"]), expr_from_json(d["rhs"]), ty=ty)
    if op == "fby":
        return A.Fby(expr_from_json(d["first"]), expr_from_json(d["rest"]), ty=ty)
    if op == "if":
        orelse = expr_from_json(d["else"]) if "else" in d else None
        return A.If(expr_from_json(d["cond"]), expr_from_json(d["then"]), orelse, ty=ty)
    raise ValueError(op)


# -- machines

def _port(p: Port) -> dict:
    return {"name": p.name, "type": str(p.type)}


def _endpoint(e: Endpoint) -> dict:
    return {"instance": e.instance, "port": e.port}


def machine_to_dict(m: DataflowMachine) -> dict:
    instances = []
    for inst in sorted(m.instances, key=lambda i: i.id):
        d = {
            "id": inst.id,
            "kind": inst.kind,
            "filter": inst.name,
            "external": inst.external,
            "ports": {"inputs": [_port(p) for p in inst.inputs],
                      "outputs": [_port(p) for p in inst.outputs]},
        }
        if inst.kind != DUPLICATOR:
            d["params"] = [_port(p) for p in inst.params]
            d["output"] = inst.output_name
            d["order"] = list(inst.order)
            d["equations"] = [
                {"lhs": eq.lhs,
                 "declared_type": str(eq.declared_type) if eq.declared_type is not None else None,
                 "rhs": expr_to_json(eq.rhs)}
                for eq in inst.equations
            ]
        instances.append(d)
    return {
        "version": IR_VERSION,
        "top": m.top_name,
        "inputs": [_port(p) for p in m.inputs],
        "outputs": [_port(m.output)],
        "externals": {},
        "instances": instances,
        "channels": [{"id": c.id, "src": _endpoint(c.src), "dst": _endpoint(c.dst),
                      "type": str(c.type)} for c in sorted(m.channels, key=lambda c: c.id)],
    }


def emit_json(m: DataflowMachine) -> str:
    return json.dumps(machine_to_dict(m), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _json_path(err: jsonschema.ValidationError) -> str:
    path = err.json_path
    if err.validator == "required" and isinstance(err.instance, dict):
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            path = f"{path}.{missing[0]}"
    return path


def import_json(text: str) -> DataflowMachine:
    """Rebuild a machine from :func:`emit_json` output; raises LucentError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LucentError([error("J001", f"invalid JSON: {exc}", JSON_SPAN)]) from None
    validator = jsonschema.Draft202012Validator(ir_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.path), e.message))
    if errors:
        raise LucentError([error("J002", f"{_json_path(e)}: {e.message}", JSON_SPAN)
                           for e in errors])
    try:
        instances = []
        for d in doc["instances"]:
            eqs = tuple(
                A.Equation(q["lhs"],
                           parse_type(q["declared_type"]) if q.get("declared_type") else None,
                           expr_from_json(q["rhs"]))
                for q in d.get("equations", []))
            instances.append(Instance(
                id=d["id"], kind=d["kind"], name=d["filter"], external=d["external"],
                inputs=tuple(Port(p["name"], parse_type(p["type"])) for p in d["ports"]["inputs"]),
                outputs=tuple(Port(p["name"], parse_type(p["type"])) for p in d["ports"]["outputs"]),
                params=tuple(Port(p["name"], parse_type(p["type"])) for p in d.get("params", [])),
                output_name=d.get("output", ""),
                equations=eqs,
                order=tuple(d.get("order", [])),
            ))
        channels = tuple(
            Channel(c["id"], Endpoint(c["src"]["instance"], c["src"]["port"]),
                    Endpoint(c["dst"]["instance"], c["dst"]["port"]), parse_type(c["type"]))
            for c in doc["channels"])
        out = doc["outputs"][0]
        m = DataflowMachine(
            top_name=doc["top"],
            instances=tuple(sorted(instances, key=lambda i: i.id)),
            channels=tuple(sorted(channels, key=lambda c: c.id)),
            inputs=tuple(Port(p["name"], parse_type(p["type"])) for p in doc["inputs"]),
            output=Port(out["name"], parse_type(out["type"])),
        )
    except ValueError as exc:
        raise LucentError([error("J003", str(exc), JSON_SPAN)]) from None
    for inst in m.instances:
        if inst.kind != DUPLICATOR and inst.output_equation is None:
            raise LucentError([error("J003", f"instance {inst.id} has no equation for its output "
                                             f"'{inst.output_name}'", JSON_SPAN)])
    validate(m)
    return m


def canonical(m: DataflowMachine) -> dict:
    """Machine dict with instance and channel ids renumbered by a walk
    upstream from the machine output; equal for isomorphic machines."""
    by_dst = {c.dst: c for c in m.channels}
    order: list[int] = []
    chan_order: list[int] = []
    todo = [c for c in m.channels if c.dst.instance is None]
    while todo:
        c = todo.pop(0)
        if c.id in chan_order:
            continue
        chan_order.append(c.id)
        src = c.src.instance
        if src is not None and src not in order:
            order.append(src)
            for p in m.instance(src).inputs:
                todo.append(by_dst[Endpoint(src, p.name)])
    for inst in m.instances:  # anything not upstream of the output
        if inst.id not in order:
            order.append(inst.id)
    for c in m.channels:
        if c.id not in chan_order:
            chan_order.append(c.id)
    inew = {old: new for new, old in enumerate(order)}
    cnew = {old: new for new, old in enumerate(chan_order)}

    def ep(e):
        return {"instance": None if e.instance is None else inew[e.instance], "port": e.port}

    d = machine_to_dict(m)
    for inst in d["instances"]:
        inst["id"] = inew[inst["id"]]
    d["instances"].sort(key=lambda i: i["id"])
    chans = {c.id: c for c in m.channels}
    d["channels"] = sorted(({"id": cnew[c.id], "src": ep(chans[c.id].src), "dst": ep(chans[c.id].dst),
                             "type": str(chans[c.id].type)} for c in m.channels),
                           key=lambda c: c["id"])
    return d


def isomorphic(a: DataflowMachine, b: DataflowMachine) -> bool:
    return canonical(a) == canonical(b)


# -- DOT

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


_SHAPES = {DUPLICATOR: "diamond", PASSTHROUGH: "ellipse"}


def _node(e: Endpoint, side: str) -> str:
    if e.instance is None:
        return _q(("in:" if side == "src" else "out:") + e.port)
    return f"n{e.instance}"


def emit_dot(m: DataflowMachine) -> str:
    lines = [f"digraph {_q(m.top_name)} {{", "  rankdir=LR;"]
    for p in m.inputs:
        lines.append(f"  {_q('in:' + p.name)} [shape=invhouse, label={_q(p.name)}];")
    for inst in sorted(m.instances, key=lambda i: i.id):
        shape = _SHAPES.get(inst.kind, "box")
        periph = ", peripheries=2" if inst.external else ""
        lines.append(f"  n{inst.id} [shape={shape}, label={_q(inst.label)}{periph}];")
    lines.append(f"  {_q('out:' + m.output.name)} [shape=house, label={_q(m.output.name)}];")
    for c in sorted(m.channels, key=lambda c: c.id):
        lines.append(f"  {_node(c.src, 'src')} -> {_node(c.dst, 'dst')} "
                     f"[label={_q(str(c.type))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
