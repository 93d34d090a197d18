import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pl2flc.analysis import infer_respos
from pl2flc.codegen import (
    PROLOGUE,
    ManglingTable,
    emit_program,
    mangle_program,
    render_expr,
    render_value,
)
from pl2flc.flc import (
    EApply,
    EArith,
    ECmp,
    ECons,
    EConj,
    EGuard,
    EIf,
    ELet,
    ENum,
    ETuple,
    EUnify,
    EVar,
    FlcProgram,
    PVar,
)
from pl2flc.prolog import parse_program
from pl2flc.reader import ReadError, read_program, read_query
from pl2flc.transform import TransformMode, transform_program

from conftest import DATA, GOLDEN, load

# golden file -> (source, mode)
GOLDENS = {
    "example1_demand": ("example1.pl", "demand"),
    "plus_conservative": ("plus.pl", "conservative"),
    "plus_functional_3": ("plus.pl", "functional"),
    "plus_functional_12": ("plus12.pl", "functional"),
    "plus_demand": ("plus.pl", "demand"),
    "apprev_demand": ("apprev.pl", "demand"),
    "app3_demand": ("app3.pl", "demand"),
    "length_demand": ("length.pl", "demand"),
    "fac_demand": ("fac.pl", "demand"),
    "two_demand": ("two.pl", "demand"),
    "dup_conservative": ("dup_plain.pl", "conservative"),
    "chain_demand": ("chain.pl", "demand"),
    "collide_conservative": ("collide.pl", "conservative"),
    "ackermann_demand": ("ackermann.pl", "demand"),
}

# rule text as displayed in the reference listings
REFERENCE = {
    "example1_demand": """
        app [] ys = ys
        app (x:xs) ys = x : app xs ys
        app3 xs ys zs = app (app xs ys) zs
        dup xs | xs =:= app3 _ (z:_) (z:_) = z""",
    "plus_conservative": """
        plus O y y = True
        plus (S x) y (S z) | plus x y z = True""",
    "plus_functional_3": """
        plus O y = y
        plus (S x) y | z =:= plus x y = S z""",
    "plus_functional_12": """
        plus y = (O, y)
        plus (S z) | (x,y) =:= plus z = (S x, y)""",
    "plus_demand": """
        plus O y = y
        plus (S x) y = S (plus x y)""",
    "apprev_demand": """
        app [] ys = ys
        app (x:xs) ys = x : app xs ys
        rev [] = []
        rev (x:xs) = app (rev xs) [x]""",
    "app3_demand": """
        app [] ys = ys
        app (x:xs) ys = x : app xs ys
        app3 xs ys zs = app (app xs ys) zs""",
    "length_demand": """
        length [] = 0
        length (x:xs) = length xs + 1""",
    "fac_demand": "fac n = if n == 0 then 1 else fac (n - 1) * n",
    "two_demand": "two = S (S O)",
}


def generate(source: str, mode: str) -> str:
    prog = load(source)
    return emit_program(transform_program(prog, infer_respos(prog), TransformMode(mode)))


def squash(text: str) -> str:
    return re.sub(r"\s+", "", text)


@pytest.mark.parametrize("name", sorted(GOLDENS))
def test_golden_byte_exact(name):
    source, mode = GOLDENS[name]
    assert generate(source, mode) == (GOLDEN / f"{name}.curry").read_text(encoding="utf-8")


@pytest.mark.parametrize("name", sorted(REFERENCE))
def test_golden_matches_reference_listing(name):
    text = (GOLDEN / f"{name}.curry").read_text(encoding="utf-8")
    rules = "".join(line for line in text.splitlines() if line and not line.startswith(("--", "data ")))
    assert squash(rules) == squash(REFERENCE[name])


@pytest.mark.parametrize("source", sorted(p.name for p in DATA.glob("*.pl")))
@pytest.mark.parametrize("mode", ["conservative", "functional", "demand"])
def test_emission_is_deterministic_and_reads_back(source, mode):
    prog = load(source)
    flc = transform_program(prog, infer_respos(prog), TransformMode(mode))
    mangled, _ = mangle_program(flc)
    text = emit_program(flc)
    assert text == emit_program(flc)
    assert text.startswith(PROLOGUE + "\n") and text.endswith("\n")
    assert read_program(text) == mangled


def test_empty_program():
    assert emit_program(FlcProgram()) == f"{PROLOGUE}\ndata Term = Unit\n"


def test_data_declaration_lists_constructors_once():
    text = generate("ackermann.pl", "conservative")
    assert text.splitlines()[1] == "data Term = O | S Term"


def test_mangling_is_injective():
    table = ManglingTable()
    names = {table.constructor(n, 0) for n in ["foo", "Foo", "True", "x y", "'q'", "[]"]}
    assert len(names) == 6
    assert table.constructor("[]", 0) == "[]"
    assert table.constructor("foo", 0) == table.constructor("foo", 0)
    assert table.constructor("foo", 1) != table.constructor("foo", 0)
    assert table.function("p/1") != table.function("p/2")
    assert table.function("if/1") not in ("if",)


def test_variable_names():
    table = ManglingTable()
    assert table.variables(["X", "__A1", "__A2", "Xs"], {"X": 2, "__A1": 1, "__A2": 2, "Xs": 1}) == {
        "X": "x",
        "__A1": "_",
        "__A2": "u1",
        "Xs": "xs",
    }


@pytest.mark.parametrize(
    "expr, text",
    [
        (EApply("f", (ECons("S", (EVar("x"),)), EVar("y"))), "f (S x) y"),
        (ECons(".", (EVar("x"), ECons(".", (EVar("y"), ECons("[]"))))), "[x, y]"),
        (ECons(".", (EVar("x"), EVar("xs"))), "x:xs"),
        (ECons(".", (EVar("x"), EApply("f", (EVar("xs"),)))), "x : f xs"),
        (EArith("-", EVar("a"), EArith("-", EVar("b"), EVar("c"))), "a - (b - c)"),
        (EArith("*", EArith("+", EVar("a"), ENum(1)), ENum(-2)), "(a + 1) * (-2)"),
        (EArith("mod", EVar("a"), ENum(2)), "a `mod` 2"),
        (EGuard(EConj(EUnify(EVar("a"), ENum(1)), ECmp("<", EVar("a"), ENum(2))), EVar("a")),
         "a =:= 1 && a < 2 &> a"),
        (ELet(((PVar("x"), ENum(1)), (PVar("y"), ENum(2))), ETuple((EVar("x"), EVar("y")))),
         "let { x = 1; y = 2 } in (x, y)"),
        (EIf(ECmp("==", EVar("n"), ENum(0)), ENum(1), ENum(2)), "if n == 0 then 1 else 2"),
    ],
)
def test_render_expr(expr, text):
    assert render_expr(expr) == text


def test_render_value():
    assert render_value(ECons("S", (ECons("O"),))) == "S O"


# -- expression round trip through the reader --------------------------------------

FUNCS = FlcProgram(rules=read_program("f x = x\ng x y = x\n").rules)
LEAF = st.one_of(
    st.sampled_from(["x", "y", "zs"]).map(EVar),
    st.integers(-3, 3).map(ENum),
    st.sampled_from(["A", "B", "[]"]).map(ECons),
)


def _node(c):
    return st.one_of(
        st.tuples(c).map(lambda a: ECons("S", a)),
        st.tuples(c, c).map(lambda a: ECons(".", a)),
        st.tuples(c).map(lambda a: EApply("f", a)),
        st.tuples(c, c).map(lambda a: EApply("g", a)),
        st.tuples(c, c).map(ETuple),
        st.tuples(st.sampled_from(["+", "-", "*", "quot"]), c, c).map(lambda a: EArith(*a)),
        st.tuples(c, c).map(lambda a: EUnify(*a)),
        st.tuples(c, c).map(lambda a: EConj(*a)),
        st.tuples(c, c).map(lambda a: EGuard(*a)),
        st.tuples(st.sampled_from(["==", "<", "/="]), c, c).map(lambda a: ECmp(*a)),
        st.tuples(c, c, c).map(lambda a: EIf(*a)),
        st.tuples(c, c).map(lambda a: ELet(((PVar("v"), a[0]),), a[1])),
    )


EXPRS = st.recursive(LEAF, _node, max_leaves=10)


@given(EXPRS)
def test_rendered_expressions_read_back(e):
    assert read_query(render_expr(e), FUNCS) == e


def test_reader_errors():
    with pytest.raises(ReadError):
        read_program("f x = (x\n")
    with pytest.raises(ReadError):
        read_query("x == y == z", FUNCS)
    with pytest.raises(ReadError):
        read_program("  f x = x\n")
