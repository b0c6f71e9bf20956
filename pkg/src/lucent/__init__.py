"""Lucent: a dataflow language front-end, machine elaborator and simulator."""
from .diagnostics import Diagnostic, LucentError, SourceSpan
from .emit import emit_dot, emit_json, import_json, isomorphic
from .engine import RuntimeFault, ShapeViolation, Trace, init, run, simulate, step
from .machine import DataflowMachine, default_top, elaborate, validate
from .parser import parse, parse_source
from .lexer import lex
from .reference import eval_reference
from .semantics import TypedProgram, analyze, check_causality, resolve, typecheck
from .values import EOD, SILENT

__version__ = "0.1.0"


def compile_source(source: str, file: str = "<input>") -> TypedProgram:
    """Lex, parse and check ``source``; raises LucentError on any diagnostic."""
    return analyze(parse_source(source, file))


__all__ = [
    "Diagnostic", "LucentError", "SourceSpan", "emit_dot", "emit_json", "import_json",
    "isomorphic", "RuntimeFault", "ShapeViolation", "Trace", "init", "run", "simulate", "step",
    "DataflowMachine", "default_top", "elaborate", "validate", "parse", "parse_source", "lex",
    "eval_reference", "TypedProgram", "analyze", "check_causality", "resolve", "typecheck",
    "EOD", "SILENT", "compile_source",
]
