import pytest
from hypothesis import given, settings, strategies as st

from lucent import compile_source, elaborate, simulate
from lucent.reference import ReferenceRefused, eval_reference
from lucent.values import EOD

from conftest import load, machine
from oracles import bits_equal, window_oracle
from progen import generate


def test_fby_chain_reference():
    got = eval_reference(load("fby_chain.lct"), "chain", {"x": [0] * 5}, 5)
    assert got["myseq"] == [0, 1, 2, 2, 2]


def test_pointwise_add_reference_pointwise():
    got = eval_reference(load("pointwise_add.lct"), "mykernel", {"a": [1, 2, 3], "b": [10, 20, 30]}, 10)
    assert got["mykernel"] == [11, 22, 33, EOD]
    assert got["a"] == [1, 2, 3, EOD]


def test_branch_fby_reference():
    got = eval_reference(load("branch_fby.lct"), "mykernel", {"a": [5, 3, 20, 7]}, 10)
    assert got["mykernel"] == [1, 2, 0, 2, EOD]


def test_reference_quanta_limit():
    got = eval_reference(load("branch_fby.lct"), "mykernel", {"a": [5, 3, 20, 7]}, 2)
    assert got["mykernel"] == [1, 2]


@pytest.mark.parametrize("name, top", [("smoothing.lct", "mykernel"), ("decimate.lct", "decimate")])
def test_reference_refuses_silent_programs(name, top):
    inputs = {p.name: [] for p in load(name).decl(top).params}
    with pytest.raises(ReferenceRefused):
        eval_reference(load(name), top, inputs, 4)


@pytest.mark.parametrize("name, inputs", [
    ("pointwise_add.lct", {"a": [1, 2, 3], "b": [10, 20, 30]}),
    ("branch_fby.lct", {"a": [5, 3, 20, 7]}),
    ("fby_chain.lct", {"x": [0] * 6}),
    ("counter.lct", {"x": list(range(5))}),
    ("running_sum.lct", {"x": [1, 2, 3, 4]}),
    ("fanout.lct", {"a": [1, 2, 3]}),
    ("passthrough.lct", {"x": [1.0, 2.0], "y": [0.5, 0.25]}),
    ("sign.lct", {"x": [-1, 0, 5]}),
    ("delta.lct", {"x": [1.5, 2.0, 0.1]}),
    ("pairs.lct", {"a": [1, 2], "b": [7, 8]}),
])
def test_corpus_engine_matches_reference(name, inputs):
    typed = load(name)
    m = machine(name)
    ref = eval_reference(typed, m.top_name, inputs, 100)[m.top_name]
    assert bits_equal(simulate(m, inputs).output, ref)


def test_counter_internal_sequence():
    got = eval_reference(load("counter.lct"), "counter", {"x": [0] * 9}, 9)
    assert got["i"] == list(range(1, 10))


# -- fby law: register implementation against the recurrence

def state_free(depth):
    leaf = st.sampled_from(["a", "b", "1", "2", "(-3)", "7"])
    if depth == 0:
        return leaf
    sub = state_free(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(sub, st.sampled_from(["+", "-", "*"]), sub).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(sub, sub, sub, sub).map(lambda t: f"(if ({t[0]} < {t[1]}) then {t[2]} else {t[3]} fi)"),
    )


def stream_of(body, a, b):
    typed = compile_source(f"external f:int(a:int, b:int) where:\n    f = {body}\n")
    return eval_reference(typed, "f", {"a": a, "b": b}, 100)["f"]


@settings(max_examples=80, deadline=None)
@given(state_free(2), state_free(2),
       st.lists(st.tuples(st.integers(-100, 100), st.integers(-100, 100)), min_size=1, max_size=8))
def test_fby_law(x, y, ab):
    a = [p for p, _ in ab]
    b = [q for _, q in ab]
    typed = compile_source(f"external f:int(a:int, b:int) where:\n    f = ({x}) fby ({y})\n")
    out = simulate(elaborate(typed, "f"), {"a": a, "b": b}).output
    xs, ys = stream_of(x, a, b), stream_of(y, a, b)
    n = len(a)
    expect = [xs[0]] + [ys[t - 1] for t in range(1, n)]
    assert out[:n] == expect


# -- generated programs

@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_generated_program_matches_reference(seed):
    g, inputs = generate(seed)
    typed = compile_source(g.source, f"gen{seed}.lct")
    m = elaborate(typed, g.top)
    out = simulate(m, inputs, max_rounds=500).output
    ref = eval_reference(typed, g.top, inputs, 500)[g.top]
    assert bits_equal(out, ref), g.source


# -- stencil

@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(width=32, allow_nan=False, allow_infinity=False), min_size=1, max_size=40))
def test_stencil_equivalence(xs):
    out = simulate(machine("smoothing.lct"), {"input": xs}).output
    assert bits_equal(out, window_oracle(xs))
