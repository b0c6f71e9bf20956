"""Stream files in, traces out (CSV and aligned tables)."""
from __future__ import annotations

import csv
import io
import re

from .engine import Trace
from .machine import DUPLICATOR, DataflowMachine
from .types import FLOAT, INT, ListOf, Type
from .values import EOD, SILENT, format_value, parse_value

_INT_RE = re.compile(r"[+-]?[0-9]+")
_FLOAT_RE = re.compile(r"[+-]?([0-9]+\.[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?|[+-]?(inf|nan|NaN)")


class StreamFileError(ValueError):
    def __init__(self, where: str, line: int, message: str):
        super().__init__(f"{where}:{line}: {message}")


def _check_scalar(text: str, ty: Type) -> bool:
    if ty == INT:
        return bool(_INT_RE.fullmatch(text))
    if ty == FLOAT:
        return bool(_FLOAT_RE.fullmatch(text))
    return True


def parse_stream(text: str, ty: Type, where: str = "<stream>") -> list:
    """One value per line; ``#`` lines and blank lines are skipped and a line
    reading ``EOD`` ends the stream early.  Int lines are plain decimals and
    float lines must contain a '.' (``nan``/``inf`` are also accepted)."""
    values = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "EOD":
            break
        scalar = ty.elem if isinstance(ty, ListOf) else ty
        parts = [p.strip() for p in line.strip("[]").split(",")] if isinstance(ty, ListOf) else [line]
        if not all(_check_scalar(p, scalar) for p in parts):
            raise StreamFileError(where, n, f"'{line}' is not a {ty} value")
        try:
            values.append(parse_value(line, ty))
        except (ValueError, TypeError, OverflowError) as exc:
            raise StreamFileError(where, n, f"'{line}' is not a {ty} value ({exc})") from None
    return values


def parse_values_flag(text: str, ty: Type) -> list:
    """Comma-separated inline values as given to ``--values name=1,2,3``."""
    if isinstance(ty, ListOf):
        return parse_stream("\n".join(re.findall(r"\[[^\]]*\]", text)), ty, "--values")
    return parse_stream("\n".join(p for p in text.split(",")), ty, "--values")


# -- output

def trace_rows(trace: Trace) -> list[tuple[int, str, int, str, str]]:
    """(round, instance label, local_time, stream, value) per observed value."""
    rows = []
    labels = trace.labels
    for ev in trace.events:
        label = labels.get(ev.instance, str(ev.instance))
        for port, v in ev.consumed:
            rows.append((ev.round, label, ev.local_time, f"{label}.{port}", format_value(v)))
        for name, v in ev.sequences:
            rows.append((ev.round, label, ev.local_time, f"{label}.{name}", format_value(v)))
        rows.append((ev.round, label, ev.local_time, f"{label}.out", format_value(ev.emission)))
    return rows


def trace_csv(trace: Trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["round", "instance", "local_time", "stream", "value"])
    w.writerows(trace_rows(trace))
    return buf.getvalue()


def trace_table(trace: Trace, machine: DataflowMachine) -> str:
    """Streams as rows, quanta as columns.

    Machine inputs come first, then for each instance its internal sequences
    and its output stream, indexed by the instance's local time.  A silent
    firing shows as ``-``.
    """
    rows: list[tuple[str, list[str]]] = []
    for name, vals in trace.inputs.items():
        rows.append((name, [format_value(v) for v in vals]))
    for inst in sorted(machine.instances, key=lambda i: i.id):
        if inst.kind == DUPLICATOR:
            continue
        events = trace.events_for(inst.id)
        for name in inst.order:
            if name == inst.output_name:
                continue
            rows.append((f"{inst.label}.{name}",
                         [format_value(dict(e.sequences).get(name, SILENT)) for e in events]))
        rows.append((inst.label, [format_value(e.emission) for e in events]))
    width = max((len(v) for _, vals in rows for v in vals), default=1)
    quanta = max((len(vals) for _, vals in rows), default=0)
    head_w = max([len("t")] + [len(n) for n, _ in rows])
    lines = ["t".ljust(head_w) + " | " + " ".join(str(t).rjust(width) for t in range(quanta))]
    lines.append("-" * len(lines[0]))
    for name, vals in rows:
        lines.append((name.ljust(head_w) + " | " + " ".join(v.rjust(width) for v in vals)).rstrip())
    return "\n".join(lines) + "\n"


def token_line(tokens) -> str:
    return " ".join(format_value(v) for v in tokens)


__all__ = ["parse_stream", "parse_values_flag", "trace_csv", "trace_table", "trace_rows",
           "token_line", "StreamFileError", "EOD"]
