import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pl2flc.prolog import parse_goal, parse_program
from pl2flc.sld import EngineError, InstantiationError, Limits, Status, evaluate, solve
from pl2flc.terms import Comp, Num, apply_goal, format_term, peano

from conftest import load


def answers(outcome, var):
    return sorted(format_term(a.subst[var]) for a in outcome.answers)


def test_plus_splits_in_three():
    out = solve(load("plus.pl"), parse_goal("plus(X,Y,s(s(o)))"))
    assert out.status is Status.EXHAUSTED
    assert sorted((format_term(a.subst["X"]), format_term(a.subst["Y"])) for a in out.answers) == [
        ("o", "s(s(o))"),
        ("s(o)", "s(o)"),
        ("s(s(o))", "o"),
    ]


def test_arithmetic_and_if_then_else():
    out = solve(load("fac.pl"), parse_goal("fac(5,F)"))
    assert answers(out, "F") == ["120"] and out.status is Status.EXHAUSTED
    out = solve(load("length.pl"), parse_goal("length([a,b,c],N)"))
    assert answers(out, "N") == ["3"]


def test_evaluate_rounding():
    assert evaluate(Comp("//", (Num(-7), Num(2))), {}) == -3
    assert evaluate(Comp("div", (Num(-7), Num(2))), {}) == -4
    assert evaluate(Comp("mod", (Num(-7), Num(2))), {}) == 1
    with pytest.raises(EngineError):
        evaluate(Comp("//", (Num(1), Num(0))), {})


def test_instantiation_error():
    with pytest.raises(InstantiationError):
        solve(parse_program("p(X) :- Y is X + 1."), parse_goal("p(A)"))


def test_unknown_predicate_fails():
    out = solve(parse_program("p(a)."), parse_goal("q(X)"))
    assert out.answers == [] and out.status is Status.EXHAUSTED


def test_infinite_tree_reports_step_limit():
    out = solve(load("dup_plain.pl"), parse_goal("dup([1,2,2,1],Z)"), Limits(max_steps=5000))
    assert answers(out, "Z") == ["1", "2"]
    assert out.status is Status.STEP_LIMIT
    assert out.total_steps <= 5000


def test_answer_limit():
    out = solve(load("app3.pl"), parse_goal("app(X,Y,Z)"), Limits(max_answers=3))
    assert out.status is Status.ANSWER_LIMIT and len(out.answers) == 3


def test_fairness_beats_left_recursion():
    # depth first search only backtracks out of the loop at the depth bound
    prog = parse_program("p(X) :- p(X).\np(b).")
    ida = solve(prog, parse_goal("p(X)"), Limits(max_steps=2000))
    dfs = solve(prog, parse_goal("p(X)"), Limits(max_steps=2000), strategy="dfs")
    assert set(answers(ida, "X")) == {"b"}
    assert ida.answers[0].steps < 20
    assert dfs.answers[0].steps >= Limits().max_depth


def test_strategies_agree_on_finite_trees():
    prog = load("ackermann.pl")
    goal = parse_goal("ackermann(s(s(o)),s(o),V)")
    ida = solve(prog, goal)
    dfs = solve(prog, goal, strategy="dfs")
    assert ida.answer_set() == dfs.answer_set()
    assert answers(ida, "V") == [format_term(peano(5))]
    with pytest.raises(ValueError):
        solve(prog, goal, strategy="bfs")


@pytest.mark.parametrize("steps", [10, 50, 200, 1000])
def test_more_steps_never_lose_answers(steps):
    prog, goal = load("app3.pl"), parse_goal("app3(X,Y,Z,[1,2,3])")
    small = solve(prog, goal, Limits(max_steps=steps))
    big = solve(prog, goal, Limits(max_steps=steps * 10))
    assert small.answer_set() <= big.answer_set()


def test_answers_are_sound():
    prog = load("apprev.pl")
    goal = parse_goal("app(X,Y,[1,2,3])")
    out = solve(prog, goal)
    assert len(out.answers) == 4
    for a in out.answers:
        instance = apply_goal(a.subst, goal)
        check = solve(prog, instance)
        assert len(check.answers) == 1


# -- Datalog programs against a brute-force model ---------------------------------

CONSTS = ["a", "b", "c"]
FACTS = st.sets(st.tuples(st.sampled_from(CONSTS), st.sampled_from(CONSTS)), max_size=6)


@given(FACTS, FACTS)
@settings(max_examples=60, deadline=None)
def test_join_against_brute_force(p_facts, q_facts):
    src = "".join(f"p({x},{y}).\n" for x, y in sorted(p_facts))
    src += "".join(f"q({x},{y}).\n" for x, y in sorted(q_facts))
    src += "r(X,Y) :- p(X,Z), q(Z,Y).\ns(X) :- p(X,X).\n"
    prog = parse_program(src)
    out = solve(prog, parse_goal("r(X,Y)"))
    assert out.status is Status.EXHAUSTED
    got = {(format_term(a.subst["X"]), format_term(a.subst["Y"])) for a in out.answers}
    want = {(x, y) for x, z, y in itertools.product(CONSTS, repeat=3) if (x, z) in p_facts and (z, y) in q_facts}
    assert got == want
    loops = {format_term(a.subst["X"]) for a in solve(prog, parse_goal("s(X)")).answers}
    assert loops == {x for x in CONSTS if (x, x) in p_facts}


@given(FACTS)
@settings(max_examples=40, deadline=None)
def test_transitive_closure_against_brute_force(edges):
    src = "".join(f"e({x},{y}).\n" for x, y in sorted(edges))
    src += "t(X,Y) :- e(X,Y).\nt(X,Y) :- e(X,Z), t(Z,Y).\n"
    # paths need at most three edges; a tight depth bound keeps every round small
    out = solve(parse_program(src), parse_goal("t(X,Y)"), Limits(max_steps=200_000, max_depth=8, max_answers=10**6))
    reach = set(edges)
    while True:
        more = {(x, w) for x, y in reach for z, w in edges if y == z} - reach
        if not more:
            break
        reach |= more
    got = {(format_term(a.subst["X"]), format_term(a.subst["Y"])) for a in out.answers}
    assert got == reach
