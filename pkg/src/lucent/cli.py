"""Command-line driver: ``lucent check|run|trace|emit``."""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from .diagnostics import LucentError, diagnostics_json
from .emit import emit_dot, emit_json
from .engine import COMPLETED, DEADLOCK, MAX_ROUNDS, InputError, RuntimeFault, init, run
from .machine import default_top, elaborate
from .parser import parse_source
from .semantics import TypedProgram, analyze
from .traceio import StreamFileError, parse_stream, parse_values_flag, token_line, trace_csv, trace_table

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_IO = 2
EXIT_DEADLOCK = 3
EXIT_MAX_ROUNDS = 4
EXIT_FAULT = 5
EXIT_USAGE = 64

_STATUS_EXIT = {COMPLETED: EXIT_OK, DEADLOCK: EXIT_DEADLOCK, MAX_ROUNDS: EXIT_MAX_ROUNDS}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _binding(text: str) -> tuple[str, str]:
    name, sep, rest = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got '{text}'")
    return name, rest


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lucent", description="Lucent dataflow compiler and simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("source", help="Lucent source file (.lct)")
        sp.add_argument("--diagnostics", choices=["text", "json"], default="text",
                        help="diagnostic format on standard error")

    sp = sub.add_parser("check", help="parse and check a program")
    common(sp)

    for name, fmt, helptext in (("run", "csv", "simulate and print the output tokens"),
                                ("trace", "table", "simulate and print a trace table")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--top", help="external filter to run (default: the only one)")
        sp.add_argument("--input", action="append", default=[], type=_binding,
                        metavar="NAME=PATH", help="bind a machine input to a stream file")
        sp.add_argument("--values", action="append", default=[], type=_binding,
                        metavar="NAME=V1,V2,...", help="bind a machine input to inline values")
        sp.add_argument("--max-rounds", type=_positive, default=10000)
        sp.add_argument("--channel-depth", type=_positive, default=None)
        sp.add_argument("--format", choices=["csv", "table"], default=fmt, help="trace format")
        sp.add_argument("--output", help="write the trace to this file")
        sp.add_argument("--parallel", action="store_true",
                        help="fire ready instances of a round concurrently")
        sp.add_argument("--checked", action="store_true",
                        help="check every runtime value against its static type")

    sp = sub.add_parser("emit", help="write the elaborated machine as JSON IR or DOT")
    common(sp)
    sp.add_argument("--top")
    sp.add_argument("--format", choices=["json", "dot"], default="json")
    sp.add_argument("--output")
    return p


def _color() -> bool:
    return os.environ.get("LUCENT_COLOR", "0") == "1"


def _report(err: LucentError, fmt: str) -> None:
    if fmt == "json":
        print(diagnostics_json(err.diagnostics), file=sys.stderr)
    else:
        for d in err.diagnostics:
            print(d.render(_color()), file=sys.stderr)


def _load(path: str) -> TypedProgram:
    with open(path, encoding="utf-8") as f:
        source = f.read()
    return analyze(parse_source(source, path))


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def _inputs(machine, args) -> dict[str, list]:
    types = {p.name: p.type for p in machine.inputs}
    bound: dict[str, list] = {}
    for name, path in args.input:
        if name not in types:
            raise UsageError(f"'{name}' is not an input of {machine.top_name}")
        if name in bound:
            raise UsageError(f"input '{name}' bound twice")
        with open(path, encoding="utf-8") as f:
            bound[name] = parse_stream(f.read(), types[name], path)
    for name, text in args.values:
        if name not in types:
            raise UsageError(f"'{name}' is not an input of {machine.top_name}")
        if name in bound:
            raise UsageError(f"input '{name}' bound twice")
        bound[name] = parse_values_flag(text, types[name])
    missing = [n for n in types if n not in bound]
    if missing:
        raise UsageError("unbound machine input(s): " + ", ".join(missing))
    return bound


def cmd_check(args) -> int:
    _load(args.source)
    return EXIT_OK


def cmd_run(args) -> int:
    typed = _load(args.source)
    machine = elaborate(typed, args.top or default_top(typed))
    state = init(machine, _inputs(machine, args), channel_depth=args.channel_depth,
                 checked=args.checked)
    to_stdout = args.command == "trace" and args.output is None

    def emit_trace(trace):
        text = trace_table(trace, machine) if args.format == "table" else trace_csv(trace)
        if to_stdout:
            sys.stdout.write(text)
        elif args.output is not None:
            _write(args.output, text)

    try:
        trace = run(state, args.max_rounds, parallel=args.parallel)
    except RuntimeFault as fault:
        if fault.trace is not None:
            emit_trace(fault.trace)
        print(f"lucent: {fault}", file=sys.stderr)
        return EXIT_FAULT
    emit_trace(trace)
    print(token_line(trace.output))
    if trace.status == DEADLOCK:
        print(f"lucent: deadlock after {trace.rounds} round(s)", file=sys.stderr)
    elif trace.status == MAX_ROUNDS:
        print(f"lucent: stopped after max rounds ({trace.rounds})", file=sys.stderr)
    if trace.stalls:
        stalled = sorted({trace.labels[iid] for _, iid in trace.stalls})
        print(f"lucent: {len(trace.stalls)} stall(s) on full channels ({', '.join(stalled)})",
              file=sys.stderr)
    return _STATUS_EXIT[trace.status]


def cmd_emit(args) -> int:
    typed = _load(args.source)
    machine = elaborate(typed, args.top or default_top(typed))
    _write(args.output, emit_json(machine) if args.format == "json" else emit_dot(machine))
    return EXIT_OK


_COMMANDS = {"check": cmd_check, "run": cmd_run, "trace": cmd_run, "emit": cmd_emit}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except LucentError as err:
        _report(err, args.diagnostics)
        return EXIT_DIAGNOSTICS
    except UsageError as exc:
        print(f"lucent: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, StreamFileError, InputError) as exc:
        print(f"lucent: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
