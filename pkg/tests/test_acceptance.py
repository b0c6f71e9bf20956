"""Acceptance criteria: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the lines print even
without ``-s``) or directly with ``python tests/test_acceptance.py``.
"""
import time

import numpy as np
import pytest

from lucent import compile_source, elaborate, simulate
from lucent.emit import emit_json, import_json, isomorphic
from lucent.engine import COMPLETED, RuntimeFault, ShapeViolation
from lucent.parser import parse_source
from lucent.pretty import pretty_program
from lucent.reference import eval_reference
from lucent.traceio import trace_csv
from lucent.values import EOD

from conftest import CORPUS, CORPUS_INPUTS, corpus_files, load, machine
from oracles import bits_equal, window_oracle
from progen import generate

LISTING1_BUDGET_S = 1.0
GENERATED_PROGRAMS = 500
GENERATED_BUDGET_S = 60.0
STENCIL_CASES = 200
STENCIL_MAX_LEN = 64
REPEATS = 10
GEN_MAX_ROUNDS = 500


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def generated(count=GENERATED_PROGRAMS):
    for seed in range(count):
        g, inputs = generate(seed)
        yield seed, g, inputs


def corpus_runs():
    for path in corpus_files():
        yield path.name, machine(path.name), CORPUS_INPUTS[path.name]


def all_programs():
    yield from corpus_runs()
    for seed, g, inputs in generated():
        yield f"gen{seed}", elaborate(compile_source(g.source), g.top), inputs


def test_1_pointwise_add_end_to_end(report):
    t0 = time.perf_counter()
    tr = simulate(machine("pointwise_add.lct"), {"a": [1, 2, 3], "b": [10, 20, 30]})
    dt = time.perf_counter() - t0
    ok = tr.output == [11, 22, 33, EOD] and tr.status == COMPLETED and dt < LISTING1_BUDGET_S
    report(1, ok, f"output={tr.output} status={tr.status} time={dt * 1000:.1f}ms (< 1 s)")


def test_2_fby_chain(report):
    m = machine("fby_chain.lct")
    tr = simulate(m, {"x": [0] * 6})
    top = next(i.id for i in m.instances if i.name == "chain")
    seq = [dict(e.sequences)["myseq"] for e in tr.events_for(top)][:6]
    ok = seq == [0, 1, 2, 2, 2, 2] and tr.output[:6] == seq
    report(2, ok, f"myseq over 6 firings = {seq}")


def test_3_counter(report):
    m = machine("counter.lct")
    tr = simulate(m, {"x": [0] * 100})
    seq = [dict(e.sequences)["i"] for e in tr.events_for(0)][:100]
    report(3, seq == list(range(1, 101)), f"i over 100 firings: {seq[:3]} .. {seq[-2:]}")


def test_4_branch_fby(report):
    inputs = {"a": [5, 3, 20, 7]}
    out = simulate(machine("branch_fby.lct"), inputs).output
    ref = eval_reference(load("branch_fby.lct"), "mykernel", inputs, 100)["mykernel"]
    report(4, out == [1, 2, 0, 2, EOD] and ref == out, f"engine={out} reference={ref}")


def test_5_smoothing_stencil(report):
    rng = np.random.default_rng(20240229)
    m = machine("smoothing.lct")
    bad = []
    for case in range(STENCIL_CASES):
        n = int(rng.integers(1, STENCIL_MAX_LEN + 1))
        xs = list(rng.integers(0, 2**32, size=n, dtype=np.uint64).astype(np.uint32).view(np.float32))
        if not bits_equal(simulate(m, {"input": xs}).output, window_oracle(xs)):
            bad.append(case)
    report(5, not bad, f"{STENCIL_CASES} random binary32 inputs, lengths 1..{STENCIL_MAX_LEN}, "
                       f"mismatches={bad}")


def test_6_generated_oracle_equivalence(report):
    t0 = time.perf_counter()
    bad, total = [], 0
    for seed, g, inputs in generated():
        typed = compile_source(g.source, f"gen{seed}.lct")
        out = simulate(elaborate(typed, g.top), inputs, max_rounds=GEN_MAX_ROUNDS).output
        ref = eval_reference(typed, g.top, inputs, GEN_MAX_ROUNDS)[g.top]
        total += 1
        if not bits_equal(out, ref):
            bad.append(seed)
    dt = time.perf_counter() - t0
    ok = not bad and total >= GENERATED_PROGRAMS and dt < GENERATED_BUDGET_S
    report(6, ok, f"{total} programs, mismatches={bad[:10]}, time={dt:.1f}s (< 60 s)")


def test_7_determinism(report):
    unstable, parallel_diff = [], []
    for name, m, inputs in corpus_runs():
        traces = {trace_csv(simulate(machine(name), inputs)) for _ in range(REPEATS)}
        if len(traces) != 1:
            unstable.append(name)
        if trace_csv(simulate(m, inputs, parallel=True)) not in traces:
            parallel_diff.append(name)
    ok = not unstable and not parallel_diff
    report(7, ok, f"{len(corpus_files())} programs x {REPEATS} runs, unstable={unstable}, "
                  f"parallel differs={parallel_diff}")


def test_8_round_trips(report):
    ast_bad, ir_bad = [], []
    for path in corpus_files():
        prog = parse_source(path.read_text(), path.name)
        if parse_source(pretty_program(prog), path.name) != prog:
            ast_bad.append(path.name)
        m = machine(path.name)
        if not isomorphic(m, import_json(emit_json(m))):
            ir_bad.append(path.name)
    ok = not ast_bad and not ir_bad
    report(8, ok, f"pretty/parse failures={ast_bad}, json isomorphism failures={ir_bad}")


def test_9_type_soundness(report):
    violations, faults, runs = [], [], 0
    for name, m, inputs in all_programs():
        runs += 1
        try:
            simulate(m, inputs, max_rounds=GEN_MAX_ROUNDS, checked=True)
        except ShapeViolation as e:
            violations.append((name, str(e)))
        except (RuntimeFault, IndexError) as e:
            # none of these programs divides by zero, so any fault here is a typing hole
            faults.append((name, repr(e)))
    ok = not violations and not faults
    report(9, ok, f"{runs} checked runs, shape violations={violations[:3]}, faults={faults[:3]}")


def test_10_eod_finality(report):
    problems, completed = [], 0
    for name, m, inputs in all_programs():
        tr = simulate(m, inputs, max_rounds=GEN_MAX_ROUNDS)
        if tr.status != COMPLETED:
            continue
        completed += 1
        if tr.output.count(EOD) != 1 or tr.output[-1] is not EOD:
            problems.append((name, "machine output"))
        for inst in m.instances:
            evs = tr.events_for(inst.id)
            ends = [k for k, e in enumerate(evs) if e.emission is EOD]
            if ends and ends[0] != len(evs) - 1:
                problems.append((name, inst.label))
    report(10, not problems and completed > 0,
           f"{completed} completed traces, violations={problems[:5]}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "--rootdir", str(CORPUS.parent.parent)]))
