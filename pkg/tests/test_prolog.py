import pytest
from hypothesis import given
from hypothesis import strategies as st

from pl2flc.prolog import ParseError, parse_goal, parse_program, parse_term, unparse_program
from pl2flc.terms import Clause, Comp, Directive, Goal, IfThenElse, Literal, LogicProgram, Num, Var, is_fresh_name

from conftest import DATA


def test_clauses_and_lists():
    prog = parse_program("app([],Ys,Ys).\napp([X|Xs],Ys,[X|Zs]) :- app(Xs,Ys,Zs).\n")
    assert prog.predicates() == [("app", 3)]
    fact, rule = prog.clauses
    assert fact.is_fact
    assert fact.head.args[0] == Comp("[]")
    assert rule.head.args[0] == Comp(".", (Var("X"), Var("Xs")))
    assert rule.body.literals == (Literal("app", (Var("Xs"), Var("Ys"), Var("Zs"))),)


def test_operators_and_arithmetic():
    t = parse_term("X is N - 1 * 2 + 3")
    assert t == Comp(
        "is", (Var("X"), Comp("+", (Comp("-", (Var("N"), Comp("*", (Num(1), Num(2))))), Num(3))))
    )
    assert parse_term("- 1") == Comp("-", (Num(1),))
    assert parse_term("-1") == Num(-1)
    assert parse_term("a - -1") == Comp("-", (Comp("a"), Num(-1)))


def test_anonymous_variables_are_distinct():
    prog = parse_program("p(_, _).")
    a, b = prog.clauses[0].head.args
    assert a != b
    assert is_fresh_name(a.name) and is_fresh_name(b.name)


def test_if_then_else_body():
    prog = (DATA / "fac.pl").read_text()
    body = parse_program(prog).clauses[0].body.literals
    assert len(body) == 1 and isinstance(body[0], IfThenElse)
    assert body[0].cond.literals[0].pred == "="
    assert len(body[0].else_.literals) == 3


@pytest.mark.parametrize(
    "src, respos",
    [
        (":- function dup/2.", {2}),
        (":- function plus/3: [1,2].", {1, 2}),
        (":- function plus/3: 3.", {3}),
        (":- function p/2: [].", set()),
    ],
)
def test_function_directives(src, respos):
    (d,) = parse_program(src).directives
    assert isinstance(d, Directive) and d.respos == frozenset(respos)


@pytest.mark.parametrize(
    "src, needle",
    [
        ("p :- !.", "cut"),
        ("p :- \\+ q.", "negation"),
        ("p(X) :- findall(Y, q(Y), X).", "findall"),
        (":- function p/2: [3].", "outside"),
        ("p(X) :- X.", ""),
        ("p(a", ""),
        ("X = 1 :- true.", "builtin"),
        ("p(__x).", ""),
    ],
)
def test_rejections_carry_location(src, needle):
    with pytest.raises(ParseError) as info:
        parse_program(src, "f.pl")
    assert str(info.value).startswith("f.pl:")
    assert needle in str(info.value)


def test_goal_parsing():
    g = parse_goal("plus(X,Y,R), plus(R,Z,o)")
    assert [lit.pred for lit in g.literals] == ["plus", "plus"]


def test_unparse_is_a_fixpoint():
    for path in sorted(DATA.glob("*.pl")):
        once = unparse_program(parse_program(path.read_text()))
        assert unparse_program(parse_program(once)) == once, path.name


NAMES = st.sampled_from(["X", "Y", "Zs", "Acc"]).map(Var)
ATOMS = st.sampled_from(["a", "nil", "[]", "Foo", "x y"]).map(Comp)
TERMS = st.recursive(
    st.one_of(NAMES, ATOMS, st.integers(-5, 5).map(Num)),
    lambda c: st.one_of(
        st.tuples(st.sampled_from(["f", "s", "+", "-"]), st.lists(c, min_size=1, max_size=2)).map(
            lambda p: Comp(p[0], tuple(p[1]))
        ),
        st.tuples(c, c).map(lambda p: Comp(".", p)),
    ),
    max_leaves=6,
)
LITERALS = st.tuples(st.sampled_from(["p", "q"]), st.lists(TERMS, max_size=3)).map(
    lambda x: Literal(x[0], tuple(x[1]))
)
BODIES = st.lists(LITERALS, max_size=3)
ITEMS = st.one_of(
    LITERALS,
    st.tuples(BODIES, BODIES, BODIES).map(lambda x: IfThenElse(Goal(tuple(x[0])), Goal(tuple(x[1])), Goal(tuple(x[2])))),
)
CLAUSES = st.tuples(LITERALS, st.lists(ITEMS, max_size=3)).map(lambda x: Clause(x[0], Goal(tuple(x[1]))))


@given(st.lists(CLAUSES, min_size=1, max_size=4))
def test_parse_unparse_round_trip(clauses):
    # empty branches print as true, which reads back as an empty goal
    prog = LogicProgram(tuple(clauses))
    assert parse_program(unparse_program(prog)) == prog
