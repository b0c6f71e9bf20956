import sys
from pathlib import Path

import pytest

from lucent import compile_source, elaborate

TESTS = Path(__file__).parent
CORPUS = TESTS / "corpus"
GOLDEN = TESTS / "golden"

sys.path.insert(0, str(TESTS))

CORPUS_INPUTS = {
    "pointwise_add.lct": {"a": [1, 2, 3], "b": [10, 20, 30]},
    "branch_fby.lct": {"a": [5, 3, 20, 7]},
    "smoothing.lct": {"input": [1.0, 2.0, 3.0, 4.0]},
    "fby_chain.lct": {"x": [0] * 6},
    "counter.lct": {"x": list(range(7))},
    "running_sum.lct": {"x": [1, 2, 3, 4]},
    "fanout.lct": {"a": [1, 2, 3]},
    "passthrough.lct": {"x": [1.0, 2.0], "y": [0.5, 0.25]},
    "decimate.lct": {"x": [10, 11, 12, 13, 14]},
    "sign.lct": {"x": [-1, 0, 5]},
    "smooth_twice.lct": {"input": [1.0, 2.0, 3.0, 4.0, 5.0]},
    "delta.lct": {"x": [1.5, 2.0, 0.1]},
    "pairs.lct": {"a": [1, 2], "b": [7, 8]},
}


def corpus_files():
    return sorted(CORPUS.glob("*.lct"))


def load(name: str):
    path = CORPUS / name
    return compile_source(path.read_text(), str(path.relative_to(TESTS.parent)))


def machine(name: str, top: str | None = None):
    typed = load(name)
    if top is None:
        top = next(d.name for d in typed.decls if d.external)
    return elaborate(typed, top)


@pytest.fixture
def smoothing():
    return machine("smoothing.lct")
