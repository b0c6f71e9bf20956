import pytest
from hypothesis import given, settings, strategies as st

from lucent import ast as A
from lucent.diagnostics import LucentError
from lucent.parser import parse_expression, parse_source
from lucent.pretty import pretty_expr, pretty_program
from lucent.types import FLOAT, INT, ListOf

from conftest import CORPUS, corpus_files


def test_pointwise_add_shape():
    prog = parse_source((CORPUS / "pointwise_add.lct").read_text())
    (decl,) = prog.decls
    assert decl.external and decl.name == "mykernel" and decl.output_type == INT
    assert [(p.name, p.type) for p in decl.params] == [("a", INT), ("b", INT)]
    (eq,) = decl.equations
    assert eq.lhs == "mykernel" and eq.declared_type is None
    assert eq.rhs == A.Binary("+", A.Ref("a"), A.Ref("b"))


def test_fby_is_right_associative():
    assert parse_expression("0 fby 1 fby 2") == A.Fby(
        A.IntLit(0), A.Fby(A.IntLit(1), A.IntLit(2)))


def test_smoothing_shape():
    prog = parse_source((CORPUS / "smoothing.lct").read_text())
    assert [(d.name, d.external) for d in prog.decls] == [
        ("stencil", False), ("calc", False), ("mykernel", True)]
    calc = prog.lookup("calc")
    assert len(calc.equations) == 2
    assert calc.equations[0].declared_type == INT
    assert prog.lookup("stencil").output_type == ListOf(FLOAT, 3)
    body = calc.output_equation.rhs
    assert isinstance(body, A.If) and isinstance(body.orelse, A.If)
    assert body.orelse.orelse is None
    assert prog.lookup("mykernel").output_equation.rhs == A.Call(
        "calc", (A.Call("stencil", (A.Ref("input"),)),))


@pytest.mark.parametrize("text, expected", [
    ("a + b fby c", A.Fby(A.Binary("+", A.Ref("a"), A.Ref("b")), A.Ref("c"))),
    ("tl(s) :: [x] == EOD",
     A.Compare("==", A.Concat(A.Tl(A.Ref("s")), A.ListLit((A.Ref("x"),))), A.EodLit())),
    ("a - b - c", A.Binary("-", A.Binary("-", A.Ref("a"), A.Ref("b")), A.Ref("c"))),
    ("a + b * c", A.Binary("+", A.Ref("a"), A.Binary("*", A.Ref("b"), A.Ref("c")))),
    ("-a * b", A.Binary("*", A.Neg(A.Ref("a")), A.Ref("b"))),
    ("x :: y :: z", A.Concat(A.Ref("x"), A.Concat(A.Ref("y"), A.Ref("z")))),
    ("a < b fby c", A.Fby(A.Compare("<", A.Ref("a"), A.Ref("b")), A.Ref("c"))),
    ("at(v, 2) / 2.0", A.Binary("/", A.At(A.Ref("v"), 2), A.FloatLit("2.0"))),
    ("if (a < 10) then 1 fby 2 else 0 fi",
     A.If(A.Compare("<", A.Ref("a"), A.IntLit(10)),
          A.Fby(A.IntLit(1), A.IntLit(2)), A.IntLit(0))),
    ("if (c) then x fi", A.If(A.Ref("c"), A.Ref("x"), None)),
])
def test_precedence(text, expected):
    assert parse_expression(text) == expected


def _code(src):
    with pytest.raises(LucentError) as exc:
        parse_source(src, "t.lct")
    return [d.code for d in exc.value.diagnostics]


@pytest.mark.parametrize("src, code", [
    ("external f:int(a:int)\n    f = a\n", "P002"),
    ("external f:int(a:int) where:\nf = a\n", "P003"),
    ("external f:int(a:int) where:\n    f = if (a < 1) then 1 else 2\n", "P004"),
    ("external f:int(a:int) where:\n    f = a\nexternal f:int(a:int) where:\n    f = a\n", "P005"),
    ("external tl:int(a:int) where:\n    tl = a\n", "P006"),
    ("external f:list[int,0](a:int) where:\n    f = [a]\n", "P007"),
    ("external f:int(a:int) where:\n    f:int = a\n", "P008"),
    ("external f:int(a:int) where:\n    f = if a < 1 then 1 else 2 fi\n", "P009"),
    ("external f:bool(a:int) where:\n    f = 1 < a < 3\n", "P010"),
    ("external f:int(a:int) where:\n    f = 2147483648\n", "P011"),
    ("external f:int(a:list[int,2]) where:\n    f = at(a, a)\n", "P012"),
])
def test_errors(src, code):
    assert code in _code(src)


def test_error_has_span_and_format():
    with pytest.raises(LucentError) as exc:
        parse_source("external f:int(a:int)\n    f = a\n", "x.lct")
    line = exc.value.diagnostics[0].render()
    assert line.startswith("x.lct:1:")
    assert ": error: missing 'where:'" in line


def test_largest_int_literal_parses():
    assert parse_expression("2147483647") == A.IntLit(2147483647)


def test_one_error_per_declaration():
    src = ("external f:int(a:int) where:\n    f = a +\n\n"
           "filter g:int(a:int) where:\n    g = (a\n\n"
           "filter h:int(a:int) where:\n    h = a\n")
    assert len(_code(src)) == 2


def test_trailing_tokens_rejected():
    with pytest.raises(LucentError):
        parse_expression("a b")
    with pytest.raises(LucentError):
        parse_source("external f:int(a:int) where:\n    f = a a\n")


def test_spans_cover_nodes():
    prog = parse_source((CORPUS / "smoothing.lct").read_text(), "l3.lct")
    for decl in prog.decls:
        for eq in decl.equations:
            for node in A.walk(eq.rhs):
                s = node.span
                assert s is not None and s.file == "l3.lct"
                assert (s.line_start, s.col_start) <= (s.line_end, s.col_end)


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_corpus_roundtrip(path):
    prog = parse_source(path.read_text())
    again = parse_source(pretty_program(prog))
    assert again == prog
    assert pretty_program(again) == pretty_program(prog)


# -- generated round trips

name_st = st.sampled_from(["a", "b", "in", "x1", "s_2"])


def exprs():
    leaves = st.one_of(
        st.integers(0, 2**31 - 1).map(A.IntLit),
        st.tuples(st.integers(0, 9999), st.integers(0, 9999)).map(
            lambda t: A.FloatLit(f"{t[0]}.{t[1]}")),
        name_st.map(A.Ref),
        st.just(A.EodLit()),
    )

    def extend(sub):
        return st.one_of(
            st.tuples(st.sampled_from("+-*/"), sub, sub).map(lambda t: A.Binary(*t)),
            st.tuples(st.sampled_from(["<", "<=", ">", ">=", "==", "!="]), sub, sub).map(
                lambda t: A.Compare(*t)),
            st.tuples(sub, sub).map(lambda t: A.Fby(*t)),
            st.tuples(sub, sub).map(lambda t: A.Concat(*t)),
            sub.map(A.Neg),
            sub.map(A.Tl),
            st.tuples(sub, st.integers(0, 5)).map(lambda t: A.At(*t)),
            st.lists(sub, min_size=1, max_size=3).map(lambda xs: A.ListLit(tuple(xs))),
            st.tuples(sub, sub, st.none() | sub).map(lambda t: A.If(*t)),
            st.tuples(st.sampled_from(["f", "g"]), st.lists(sub, max_size=3)).map(
                lambda t: A.Call(t[0], tuple(t[1]))),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=300)
@given(exprs())
def test_expression_roundtrip(e):
    assert parse_expression(pretty_expr(e)) == e


@settings(max_examples=100)
@given(exprs())
def test_pretty_is_stable(e):
    text = pretty_expr(e)
    assert pretty_expr(parse_expression(text)) == text
