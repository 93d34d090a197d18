"""SLD resolution with leftmost selection and bounded, fair search."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .terms import (
    Clause,
    Comp,
    Goal,
    IfThenElse,
    Literal,
    LogicProgram,
    Num,
    Substitution,
    Term,
    Var,
    canonical,
    format_term,
    is_fresh_name,
    literal_vars,
    resolve,
    unify_into,
    occurs_bound as occurs,
    walk,
)


class Status(enum.Enum):
    EXHAUSTED = "exhausted"
    STEP_LIMIT = "step-limit"
    ANSWER_LIMIT = "answer-limit"


class EngineError(Exception):
    pass


class InstantiationError(EngineError):
    pass


@dataclass(frozen=True)
class Limits:
    max_steps: int = 100_000
    max_depth: int = 1_000
    max_answers: int = 100

    def __post_init__(self) -> None:
        if min(self.max_steps, self.max_depth, self.max_answers) <= 0:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class Answer:
    subst: dict[str, Term]
    steps: int

    def key(self) -> tuple[Term, ...]:
        """Canonical form for comparisons modulo renaming."""
        return canonical(self.subst[name] for name in sorted(self.subst))

    def render(self) -> str:
        names = sorted(self.subst)
        terms = canonical(self.subst[n] for n in names)
        return "{" + ", ".join(f"{n} -> {format_term(t)}" for n, t in zip(names, terms)) + "}"


@dataclass
class SearchOutcome:
    answers: list[Answer] = field(default_factory=list)
    status: Status = Status.EXHAUSTED
    total_steps: int = 0

    def render(self) -> str:
        lines = [a.render() for a in self.answers]
        lines.append(f"status: {self.status.value} steps={self.total_steps}")
        return "\n".join(lines) + "\n"

    def answer_set(self) -> set[tuple[Term, ...]]:
        return {a.key() for a in self.answers}


ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "mod": lambda a, b: a % b,
    "div": lambda a, b: a // b,
}


def _quot(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def evaluate(t: Term, bindings: Substitution) -> int:
    t = walk(t, bindings)
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Var):
        raise InstantiationError("arguments are not sufficiently instantiated")
    if len(t.args) == 2 and (t.functor in ARITH or t.functor == "//"):
        a, b = evaluate(t.args[0], bindings), evaluate(t.args[1], bindings)
        if t.functor in ("//", "mod", "div") and b == 0:
            raise EngineError("evaluation error: zero divisor")
        return _quot(a, b) if t.functor == "//" else ARITH[t.functor](a, b)
    if len(t.args) == 1 and t.functor in ("-", "+"):
        v = evaluate(t.args[0], bindings)
        return -v if t.functor == "-" else v
    raise EngineError(f"type error: {format_term(t)} is not evaluable")


COMPARE = {
    "=:=": lambda a, b: a == b,
    "=\\=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "=<": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


def _rename(t: Term, suffix: str, cache: dict[str, Var]) -> Term:
    if isinstance(t, Var):
        v = cache.get(t.name)
        if v is None:
            v = cache[t.name] = Var(f"__S{suffix}_{t.name.lstrip('_')}")
        return v
    if isinstance(t, Comp) and t.args:
        return Comp(t.functor, tuple(_rename(a, suffix, cache) for a in t.args))
    return t


def _rename_item(item, suffix: str, cache: dict[str, Var]):
    if isinstance(item, Literal):
        return Literal(item.pred, tuple(_rename(a, suffix, cache) for a in item.args))
    return IfThenElse(
        Goal(tuple(_rename_item(x, suffix, cache) for x in item.cond.literals)),
        Goal(tuple(_rename_item(x, suffix, cache) for x in item.then.literals)),
        Goal(tuple(_rename_item(x, suffix, cache) for x in item.else_.literals)),
    )


def _index_key(t: Term) -> tuple | None:
    if isinstance(t, Comp):
        return (t.functor, len(t.args))
    if isinstance(t, Num):
        return (t.value,)
    return None


class _Limit(Exception):
    pass


class _Solver:
    """Depth-bounded depth-first resolution over one mutable binding store.

    Goals are linked lists ``(item, rest)`` ending in ``None``; backtracking
    undoes the trail instead of copying stores.
    """

    def __init__(self, program: LogicProgram, limits: Limits) -> None:
        self.limits = limits
        self.index: dict[tuple[str, int], list[tuple[Clause, tuple | None]]] = {}
        for c in program.clauses:
            first = _index_key(c.head.args[0]) if c.head.args else None
            self.index.setdefault(c.key, []).append((c, first))
        self.bindings: Substitution = {}
        self.trail: list[str] = []
        self.steps = 0
        self.counter = 0
        self.cut_off = False

    def _undo(self, mark: int) -> None:
        trail, b = self.trail, self.bindings
        while len(trail) > mark:
            del b[trail.pop()]

    def _tick(self) -> None:
        if self.steps >= self.limits.max_steps:
            raise _Limit
        self.steps += 1

    def _try(self, goal, depth, cands, i):
        """Resolve ``goal``'s first literal with ``cands[i:]``; returns the new
        goal and the choicepoint for the remaining candidates."""
        item, rest = goal
        while i < len(cands):
            clause = cands[i]
            i += 1
            mark = len(self.trail)
            self.counter += 1
            cache: dict[str, Var] = {}
            suffix = str(self.counter)
            head = [_rename(a, suffix, cache) for a in clause.head.args]
            if not self._unify_head(head, item.args, cache):
                self._undo(mark)
                continue
            self._tick()
            new = rest
            for x in reversed(clause.body.literals):
                new = (_rename_item(x, suffix, cache), new)
            choice = (goal, depth, mark, cands, i) if i < len(cands) else None
            return (new, depth + 1), choice
        return None, None

    def _unify_head(self, head: list[Term], args: tuple[Term, ...], cache: dict[str, Var]) -> bool:
        """Unify a freshly renamed head with goal arguments.

        A head variable that no binding made here has reached yet cannot occur
        in the other side, so its occurs check is skipped; this keeps steps
        on long partial lists constant time.
        """
        fresh = {v.name for v in cache.values()}
        head_nodes: set[int] = set()
        todo = list(head)
        while todo:
            t = todo.pop()
            if isinstance(t, Comp) and t.args:
                head_nodes.add(id(t))
                todo.extend(t.args)

        def mark(t: Term) -> None:
            stack = [t]
            while stack:
                t = stack.pop()
                if isinstance(t, Var):
                    fresh.discard(t.name)
                elif id(t) in head_nodes:
                    stack.extend(t.args)  # type: ignore[union-attr]

        b, trail = self.bindings, self.trail
        stack = list(zip(head, args))
        while stack:
            x, y = stack.pop()
            x = walk(x, b)
            y = walk(y, b)
            if x is y:
                continue
            if isinstance(y, Var) and not isinstance(x, Var):
                x, y = y, x
            if isinstance(x, Var):
                if isinstance(y, Var) and x.name == y.name:
                    continue
                if x.name not in fresh and occurs(x.name, y, b):
                    return False
                b[x.name] = y
                trail.append(x.name)
                mark(y)
            elif isinstance(x, Num) or isinstance(y, Num):
                if x != y:
                    return False
            else:
                if x.functor != y.functor or len(x.args) != len(y.args):
                    return False
                stack.extend(zip(x.args, y.args))
        return True

    def _step(self, goal, depth):
        """Advance one derivation step; returns ``(next state, choicepoint)``."""
        item, rest = goal
        b = self.bindings
        if isinstance(item, IfThenElse):
            cond = None
            for x in reversed(item.cond.literals):
                cond = (x, cond)
            mark = len(self.trail)
            found = self.run(cond, depth, first_only=True)
            if found is not None:
                branch, depth = item.then, found
            elif self._cond_cut:
                return None, None
            else:
                self._undo(mark)
                branch = item.else_
            new = rest
            for x in reversed(branch.literals):
                new = (x, new)
            return (new, depth + (found is None)), None
        key = item.key
        if key == ("=", 2):
            self._tick()
            ok = unify_into(item.args[0], item.args[1], b, self.trail)
            return ((rest, depth + 1) if ok else None), None
        if key == ("is", 2):
            self._tick()
            ok = unify_into(item.args[0], Num(evaluate(item.args[1], b)), b, self.trail)
            return ((rest, depth + 1) if ok else None), None
        if item.pred in COMPARE and len(item.args) == 2:
            self._tick()
            ok = COMPARE[item.pred](evaluate(item.args[0], b), evaluate(item.args[1], b))
            return ((rest, depth + 1) if ok else None), None
        entries = self.index.get(key, ())
        first = _index_key(walk(item.args[0], b)) if item.args else None
        cands = [c for c, k in entries if first is None or k is None or k == first]
        return self._try(goal, depth, cands, 0)

    def run(self, goal, depth: int, first_only: bool = False, on_answer=None) -> int | None:
        """Depth-first search below ``self.bound``.

        With ``first_only`` the search stops at the first success, keeps its
        bindings and returns its depth; otherwise ``on_answer(depth)`` is called
        per success and may return True to stop.
        """
        choices: list = []
        state = (goal, depth)
        self._cond_cut = False
        local_cut = False
        while True:
            if state is None:
                if not choices:
                    self._cond_cut = local_cut
                    return None
                g, d, mark, cands, i = choices.pop()
                self._undo(mark)
                state, choice = self._try(g, d, cands, i)
                if choice is not None:
                    choices.append(choice)
                continue
            goal, depth = state
            if goal is None:
                if first_only:
                    return depth
                if on_answer(depth):
                    return depth
                state = None
                continue
            if depth >= self.bound:
                self.cut_off = local_cut = True
                state = None
                continue
            state, choice = self._step(goal, depth)
            if choice is not None:
                choices.append(choice)


def goal_variables(goal: Goal) -> list[str]:
    return [n for n in literal_vars(goal.literals) if not is_fresh_name(n)]


def solve(program: LogicProgram, goal: Goal, limits: Limits | None = None, strategy: str = "id") -> SearchOutcome:
    """Enumerate computed answers of ``goal`` with leftmost selection.

    ``id`` runs iterative deepening on derivation length with doubling bounds,
    reporting each answer in the first round whose bound covers it; ``dfs``
    is a single depth-first pass bounded by ``max_depth``, as Prolog would do.
    """
    if strategy not in ("id", "dfs"):
        raise ValueError(f"unknown search strategy {strategy!r}")
    limits = limits or Limits()
    solver = _Solver(program, limits)
    names = goal_variables(goal)
    outcome = SearchOutcome()
    start = None
    for x in reversed(goal.literals):
        start = (x, start)
    low = -1

    def record(depth: int) -> bool:
        if depth <= low:
            return False
        subst = {n: resolve(Var(n), solver.bindings) for n in names}
        outcome.answers.append(Answer(subst, solver.steps))
        return len(outcome.answers) >= limits.max_answers

    bound = limits.max_depth if strategy == "dfs" else min(16, limits.max_depth)
    try:
        while True:
            solver.bound = bound
            solver.cut_off = False
            stopped = solver.run(start, 0, on_answer=record)
            solver._undo(0)
            if stopped is not None:
                outcome.status = Status.ANSWER_LIMIT
                break
            if not solver.cut_off:
                break
            if bound >= limits.max_depth:
                outcome.status = Status.STEP_LIMIT
                break
            low, bound = bound, min(2 * bound, limits.max_depth)
    except _Limit:
        outcome.status = Status.STEP_LIMIT
    outcome.total_steps = solver.steps
    return outcome
