"""SLD answers against narrowing answers of the translated programs."""

import pytest

from pl2flc.harness import EQUAL, MISMATCH, compare
from pl2flc.prolog import parse_goal
from pl2flc.sld import Limits, Status
from pl2flc.terms import Comp, match
from pl2flc.transform import CONSERVATIVE, DEMAND, FUNCTIONAL, TransformMode

from conftest import load
from corpus import DIVERGENT, MAPS, PAIRS, map_cases, pair, respos_for

LIMITS = Limits(max_steps=20_000)


def ids(cases):
    return [" ".join(str(x) for x in c) for c in cases]


@pytest.mark.parametrize("name, goal", PAIRS, ids=ids(PAIRS))
def test_conservative_preserves_answers(name, goal):
    c = compare(*pair(name, goal), TransformMode(CONSERVATIVE), LIMITS)
    assert c.sld.status is Status.EXHAUSTED and c.narrowing.status is Status.EXHAUSTED
    assert c.verdict == EQUAL, c.render()


CASES = map_cases()


@pytest.mark.parametrize("name, goal, index", CASES, ids=ids(CASES))
def test_functional_preserves_answers_for_any_map(name, goal, index):
    prog, g = pair(name, goal)
    c = compare(prog, g, TransformMode(FUNCTIONAL), LIMITS, respos=respos_for(prog, name, index))
    assert c.narrowing.status is Status.EXHAUSTED
    assert c.verdict == EQUAL, c.render()


def test_every_program_has_two_maps():
    used = {}
    for name, _, i in CASES:
        used.setdefault(name, set()).add(i)
    assert all(len(v) >= 2 for v in used.values())
    plus_maps = {frozenset(MAPS["plus.pl"][i][("plus", 3)]) for i in used["plus.pl"]}
    assert {frozenset({3}), frozenset({1, 2})} <= plus_maps


@pytest.mark.parametrize("name, goal, index", sorted(DIVERGENT), ids=ids(sorted(DIVERGENT)))
def test_divergent_maps_stay_sound(name, goal, index):
    prog, g = pair(name, goal)
    c = compare(prog, g, TransformMode(FUNCTIONAL), Limits(max_steps=2000), respos=respos_for(prog, name, index))
    assert c.verdict != MISMATCH


def subsumed(answer, general):
    return any(match(Comp("t", g), Comp("t", answer)) is not None for g in general)


@pytest.mark.parametrize("name, goal", PAIRS, ids=ids(PAIRS))
def test_demand_answers_cover_sld(name, goal):
    c = compare(*pair(name, goal), TransformMode(DEMAND), LIMITS)
    assert c.sld.status is Status.EXHAUSTED
    assert all(subsumed(a, c.narrow_answers) for a in c.sld_answers), c.render()


@pytest.mark.parametrize("name, goal", PAIRS[:8], ids=ids(PAIRS[:8]))
def test_inlining_does_not_change_answers(name, goal):
    on = compare(*pair(name, goal), TransformMode(DEMAND, inline=True), LIMITS)
    off = compare(*pair(name, goal), TransformMode(DEMAND, inline=False), LIMITS)
    assert on.narrow_answers == off.narrow_answers


def test_demand_may_add_answers_when_bindings_are_not_needed():
    # dec(o,Y) fails, yet const never demands Y
    prog, goal = load("lazy.pl"), parse_goal("p(R)")
    assert compare(prog, goal, TransformMode(CONSERVATIVE)).verdict == EQUAL
    demand = compare(prog, goal, TransformMode(DEMAND))
    assert demand.sld_answers == set()
    assert demand.narrow_answers == {(Comp("o"),)}
    assert demand.verdict == MISMATCH
