"""Acceptance criteria 1 to 8; the terminal summary prints one line per criterion."""

import os
import subprocess
import sys
import time

import pytest

from pl2flc.analysis import infer_respos, minimal_indseq_sets
from pl2flc.codegen import emit_program, render_value
from pl2flc.harness import EQUAL, compare, run_bench
from pl2flc.narrow import count_steps, narrow
from pl2flc.prolog import parse_goal
from pl2flc.reader import read_program, read_query
from pl2flc.sld import Limits, Status, solve
from pl2flc.terms import Comp, Num, Term, format_term, peano
from pl2flc.transform import CONSERVATIVE, FUNCTIONAL, TransformMode, transform_program

from conftest import BENCH, GOLDEN, OFFLINE_ENV, ROOT, load
from corpus import MAPS, PAIRS, map_cases, pair, respos_for

GOLDEN_RUNTIME = 1.0  # seconds, criterion 1
EQUIV_RUNTIME = 10.0  # seconds, criterion 2
CASE_RUNTIME = 5.0  # seconds per case, criterion 4
SUITE_RUNTIME = 120.0  # seconds, criterion 8
SLD_STEPS = 100_000
ISPOS = "isPos O = False\nisPos (S x) = True\n"
S5 = "(S (S (S (S (S O)))))"


def report(n, text):
    print(f"criterion {n}: {text}")


def golden_program(name, extra=""):
    return read_program((GOLDEN / f"{name}.curry").read_text(encoding="utf-8") + extra)


# -- 1 --------------------------------------------------------------------------------

CRITERION1 = [
    ("example1.pl", "demand", "example1_demand"),
    ("plus.pl", "conservative", "plus_conservative"),
    ("plus.pl", "functional", "plus_functional_3"),
    ("plus12.pl", "functional", "plus_functional_12"),
    ("plus.pl", "demand", "plus_demand"),
    ("apprev.pl", "demand", "apprev_demand"),
    ("app3.pl", "demand", "app3_demand"),
    ("length.pl", "demand", "length_demand"),
    ("fac.pl", "demand", "fac_demand"),
    ("two.pl", "demand", "two_demand"),
]


def test_criterion_1_goldens():
    start = time.perf_counter()
    for source, mode, name in CRITERION1:
        prog = load(source)
        text = emit_program(transform_program(prog, infer_respos(prog), TransformMode(mode)))
        assert text == (GOLDEN / f"{name}.curry").read_text(encoding="utf-8"), name
    elapsed = time.perf_counter() - start
    report(1, f"{len(CRITERION1)} goldens byte-exact in {elapsed:.3f}s")
    assert elapsed < GOLDEN_RUNTIME


# -- 2 --------------------------------------------------------------------------------


def test_criterion_2_conservative_equivalence():
    start = time.perf_counter()
    for name, goal in PAIRS:
        c = compare(*pair(name, goal), TransformMode(CONSERVATIVE), Limits(max_steps=20_000))
        assert c.sld.status is Status.EXHAUSTED, (name, goal)
        assert c.narrowing.status is Status.EXHAUSTED, (name, goal)
        assert c.verdict == EQUAL, c.render()
    elapsed = time.perf_counter() - start
    report(2, f"{len(PAIRS)} pairs equal and exhausted in {elapsed:.2f}s")
    assert len(PAIRS) >= 10
    assert elapsed < EQUIV_RUNTIME


# -- 3 --------------------------------------------------------------------------------


def test_criterion_3_functional_equivalence():
    cases = map_cases()
    per_program = {}
    for name, goal, index in cases:
        prog, g = pair(name, goal)
        c = compare(prog, g, TransformMode(FUNCTIONAL), Limits(max_steps=20_000), respos=respos_for(prog, name, index))
        assert c.verdict == EQUAL, c.render()
        per_program.setdefault(name, set()).add(index)
    assert all(len(maps) >= 2 for maps in per_program.values())
    plus = {MAPS["plus.pl"][i][("plus", 3)] for i in per_program["plus.pl"]}
    assert {frozenset({3}), frozenset({1, 2})} <= plus
    report(3, f"{len(cases)} (pair, map) cases equal over {len(per_program)} programs")


def test_criterion_3_splitting_output():
    prog = golden_program("plus_functional_12")
    out = narrow(prog, read_query("plus (S (S O))", prog))
    assert out.status is Status.EXHAUSTED
    assert [render_value(r.value) for r in out.results] == ["(O, S (S O))", "(S O, S O)", "(S (S O), O)"]
    report(3, "plus (S (S O)) yields exactly three pairs")


# -- 4 --------------------------------------------------------------------------------

CRITERION4 = [
    ("a", "dup_plain.pl", "dup([],Z)", "example1_demand", "dup []", 0),
    ("b", "app3.pl", "app3(Xs,Ys,Zs,[])", "app3_demand", "app3 xs ys zs =:= []", 1),
    ("c", "plus.pl", "plus(X,Y,R),plus(R,Z,o)", "plus_demand", "plus (plus x y) z =:= O", 1),
]


@pytest.mark.parametrize("case, source, goal, target, query, expected", CRITERION4, ids=[c[0] for c in CRITERION4])
def test_criterion_4_search_space(case, source, goal, target, query, expected):
    start = time.perf_counter()
    # the depth bound is lifted so that the step budget is what stops SLD
    sld = solve(load(source), parse_goal(goal), Limits(max_steps=SLD_STEPS, max_depth=SLD_STEPS))
    prog = golden_program(target)
    out = narrow(prog, read_query(query, prog))
    elapsed = time.perf_counter() - start
    report(4, f"({case}) sld {sld.status.value} at {sld.total_steps}; narrowing {out.status.value} "
              f"with {len(out.results)} in {elapsed:.2f}s")
    assert sld.status is Status.STEP_LIMIT and sld.total_steps == SLD_STEPS
    assert out.status is Status.EXHAUSTED and len(out.results) == expected
    assert elapsed < CASE_RUNTIME


# -- 5 --------------------------------------------------------------------------------


def test_criterion_5_demand_steps():
    demand = golden_program("plus_demand", ISPOS)
    conservative = golden_program("plus_conservative", ISPOS)
    lazy = count_steps(demand, read_query(f"isPos (plus {S5} n2)", demand))
    strict = count_steps(conservative, read_query(f"plus {S5} n2 r &> isPos r", conservative))
    report(5, f"demand {lazy} steps, conservative route {strict} steps")
    assert lazy == 2
    assert strict > lazy


# -- 6 --------------------------------------------------------------------------------


def test_criterion_6_inference():
    ack = load("ackermann.pl")
    assert frozenset({1, 2}) in minimal_indseq_sets(ack.clauses)
    assert infer_respos(ack)[("ackermann", 3)] == {3}
    apprev = infer_respos(load("apprev.pl"))
    assert apprev[("app", 3)] == {3} and apprev[("rev", 2)] == {2}
    assert infer_respos(load("app3.pl"))[("app3", 4)] == {4}
    assert infer_respos(load("length.pl"))[("length", 2)] == {2}
    assert infer_respos(load("two.pl"))[("two", 1)] == {1}
    q = load("q.pl")
    assert set(minimal_indseq_sets(q.clauses)) == {frozenset({1}), frozenset({2})}
    assert infer_respos(q)[("q", 2)] == {2}
    report(6, "all inferred sets exact")


# -- 7 --------------------------------------------------------------------------------


def peano_ackermann(m: Term, n: Term) -> Term:
    """Rewrite the three ackermann equations directly on Peano terms."""
    o = Comp("o")
    stack, result = [m], n
    while stack:
        m = stack.pop()
        if m == o:
            result = Comp("s", (result,))
        elif result == o:
            stack.append(m.args[0])
            result = Comp("s", (o,))
        else:
            stack.append(m.args[0])
            stack.append(m)
            result = result.args[0]
    return result


def test_criterion_7_bench():
    report_ = run_bench(BENCH)
    print(report_.table())
    for name in ("rev64", "takPeano", "ackermann"):
        for mode in ("conservative", "functional", "demand"):
            assert report_.verdicts[(name, mode)] == EQUAL, (name, mode)
    oracle = peano_ackermann(peano(3), peano(2))
    assert oracle == peano(29)
    assert report_.answers[("ackermann", "sld")] == {(oracle,)}
    assert report_.answers[("ackermann", "demand")] == {(oracle,)}
    rev = report_.answers[("rev64", "demand")]
    assert {format_term(k[0]) for k in rev} == {"[" + ",".join(str(i) for i in range(64, 0, -1)) + "]"}
    report(7, "bench tables emitted; answer sets equal; ackermann(3,2) = s^29(o)")


# -- 8 --------------------------------------------------------------------------------


@pytest.mark.skipif(os.environ.get(OFFLINE_ENV) == "1", reason="already inside the offline run")
def test_criterion_8_headless_suite():
    env = {**os.environ, OFFLINE_ENV: "1"}
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "tests", "--deselect",
         "tests/test_acceptance.py::test_criterion_8_headless_suite"],
        cwd=ROOT, env=env, capture_output=True, text=True, timeout=SUITE_RUNTIME,
    )
    elapsed = time.perf_counter() - start
    report(8, f"offline suite exit {proc.returncode} in {elapsed:.1f}s")
    assert proc.returncode == 0, proc.stdout[-2000:]
    assert elapsed < SUITE_RUNTIME
