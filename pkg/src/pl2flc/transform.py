"""Logic program to functional logic program transformations.

Three levels are provided:

* conservative: every predicate becomes a Boolean function;
* functional: result arguments (per a :data:`ResPosMap`) are returned as a
  tuple and unified with ``=:=`` at call sites;
* demand: like functional, but result variables that are safe to bind become
  lazy ``where`` bindings, which are then inlined when used once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .analysis import ResPosMap
from .flc import (
    TRUE,
    DataDecl,
    EApply,
    EArith,
    ECmp,
    ECons,
    EGuard,
    EIf,
    ELet,
    ENum,
    EUnify,
    EVar,
    Expr,
    FlcProgram,
    Pattern,
    PCons,
    PNum,
    PVar,
    Rule,
    conj,
    occurrence_counts,
    pattern_vars,
    ptuple_or_single,
    rule_exprs,
    substitute,
    tuple_or_single,
    walk_exprs,
)
from .terms import (
    Clause,
    Comp,
    Goal,
    IfThenElse,
    Literal,
    LogicProgram,
    Num,
    Term,
    Var,
    literal_vars,
    term_vars,
)

CONSERVATIVE = "conservative"
FUNCTIONAL = "functional"
DEMAND = "demand"

ARITH_OPS = {"+": "+", "-": "-", "*": "*", "//": "quot", "mod": "mod", "div": "div"}
CMP_OPS = {"<": "<", ">": ">", "=<": "<=", ">=": ">=", "=:=": "==", "=\\=": "/="}
LIST_CONSTRUCTORS = {("[]", 0), (".", 2)}


class TransformError(Exception):
    pass


@dataclass(frozen=True)
class TransformMode:
    kind: str = DEMAND
    inline: bool = True
    use_let: bool = True

    def __post_init__(self) -> None:
        if self.kind not in (CONSERVATIVE, FUNCTIONAL, DEMAND):
            raise ValueError(f"unknown transformation mode {self.kind!r}")

    @property
    def binds(self) -> bool:
        return self.kind == DEMAND and self.use_let


def function_name(key: tuple[str, int]) -> str:
    return f"{key[0]}/{key[1]}"


# ---------------------------------------------------------------------------
# terms


def transform_term(t: Term) -> Expr:
    if isinstance(t, Var):
        return EVar(t.name)
    if isinstance(t, Num):
        return ENum(t.value)
    return ECons(t.functor, tuple(transform_term(a) for a in t.args))


def term_to_pattern(t: Term) -> Pattern:
    if isinstance(t, Var):
        return PVar(t.name)
    if isinstance(t, Num):
        return PNum(t.value)
    return PCons(t.functor, tuple(term_to_pattern(a) for a in t.args))


def split_args(lit: Literal, respos: Iterable[int]) -> tuple[list[Term], list[Term]]:
    """Result arguments and remaining arguments, both in position order."""
    positions = set(respos)
    results = [a for i, a in enumerate(lit.args, 1) if i in positions]
    rest = [a for i, a in enumerate(lit.args, 1) if i not in positions]
    return results, rest


def translate_arith_expr(t: Term) -> Expr:
    if isinstance(t, Var):
        return EVar(t.name)
    if isinstance(t, Num):
        return ENum(t.value)
    if len(t.args) == 2 and t.functor in ARITH_OPS:
        return EArith(ARITH_OPS[t.functor], translate_arith_expr(t.args[0]), translate_arith_expr(t.args[1]))
    if len(t.args) == 1 and t.functor == "-":
        return EArith("-", ENum(0), translate_arith_expr(t.args[0]))
    if len(t.args) == 1 and t.functor == "+":
        return translate_arith_expr(t.args[0])
    raise TransformError(f"unsupported arithmetic expression: {t}")


def _is_builtin(lit: Literal) -> bool:
    return lit.key == ("is", 2) or lit.key == ("=", 2) or (lit.pred in CMP_OPS and lit.arity == 2)


def translate_arith(lit: Literal, respos: ResPosMap | None = None) -> Expr:
    """Condition form of an arithmetic or unification builtin literal."""
    if lit.key == ("is", 2):
        return EUnify(transform_term(lit.args[0]), translate_arith_expr(lit.args[1]))
    if lit.key == ("=", 2):
        return EUnify(transform_term(lit.args[0]), transform_term(lit.args[1]))
    if lit.pred in CMP_OPS and lit.arity == 2:
        return ECmp(CMP_OPS[lit.pred], translate_arith_expr(lit.args[0]), translate_arith_expr(lit.args[1]))
    raise TransformError(f"not an arithmetic builtin: {lit}")


def translate_test(lit: Literal) -> Expr:
    """Boolean test used as an if-then-else condition."""
    if lit.key == ("=", 2):
        return ECmp("==", transform_term(lit.args[0]), transform_term(lit.args[1]))
    if lit.pred in CMP_OPS and lit.arity == 2:
        return ECmp(CMP_OPS[lit.pred], translate_arith_expr(lit.args[0]), translate_arith_expr(lit.args[1]))
    raise TransformError(f"if-then-else condition is not a simple test: {lit}")


# ---------------------------------------------------------------------------
# clause translation


@dataclass
class _Item:
    """One body literal after translation."""

    cond: Expr  # condition form
    binding: tuple[Pattern, Expr] | None = None  # candidate binding form
    bound: tuple[str, ...] = ()  # variables the binding would define
    inputs: frozenset[str] = frozenset()  # variables the binding reads
    results: frozenset[str] = frozenset()  # variables occurring in result args


class _Translator:
    def __init__(self, respos: ResPosMap, mode: TransformMode) -> None:
        self.respos = respos
        self.mode = mode

    def positions(self, key: tuple[str, int]) -> frozenset[int]:
        if self.mode.kind == CONSERVATIVE:
            return frozenset()
        return self.respos.get(key, frozenset())

    # -- literals -----------------------------------------------------------
    def item(self, lit: Literal) -> _Item:
        if _is_builtin(lit):
            cond = translate_arith(lit)
            if lit.key in (("is", 2), ("=", 2)):
                target = lit.args[0]
                results = frozenset(term_vars(target))
                if isinstance(target, Var):
                    rhs = cond.rhs  # type: ignore[union-attr]
                    inputs = frozenset(term_vars(lit.args[1]))
                    return _Item(cond, (PVar(target.name), rhs), (target.name,), inputs, results)
                return _Item(cond, results=results)
            return _Item(cond)
        u = self.positions(lit.key)
        fname = function_name(lit.key)
        if not u:
            return _Item(EApply(fname, tuple(transform_term(a) for a in lit.args)))
        results, rest = split_args(lit, u)
        call = EApply(fname, tuple(transform_term(a) for a in rest))
        cond = EUnify(tuple_or_single([transform_term(r) for r in results]), call)
        result_vars: dict[str, None] = {}
        for r in results:
            term_vars(r, result_vars)
        names = [r.name for r in results if isinstance(r, Var)]
        if len(names) == len(results) and len(set(names)) == len(names):
            inputs: dict[str, None] = {}
            for a in rest:
                term_vars(a, inputs)
            pattern = ptuple_or_single([PVar(n) for n in names])
            return _Item(cond, (pattern, call), tuple(names), frozenset(inputs), frozenset(result_vars))
        return _Item(cond, results=frozenset(result_vars))

    def ite_condition(self, g: Goal) -> Expr:
        tests = []
        for lit in g.literals:
            if isinstance(lit, IfThenElse):
                raise TransformError(f"if-then-else condition is not a simple test: {lit}")
            tests.append(translate_test(lit))
        return conj(tests)

    def strict_goal(self, g: Goal) -> Expr:
        """Conjunction of conditions; if-then-else stays a Boolean expression."""
        parts = []
        for lit in g.literals:
            if isinstance(lit, IfThenElse):
                parts.append(EIf(self.ite_condition(lit.cond), self.strict_goal(lit.then), self.strict_goal(lit.else_)))
            else:
                parts.append(self.item(lit).cond)
        return conj(parts)

    # -- bodies ---------------------------------------------------------------
    def body(
        self, items: Sequence, rhs: Expr, blocked: set[str]
    ) -> tuple[list[tuple[Pattern, Expr]], list[Expr], Expr]:
        """Translate body ``items`` whose value is ``rhs``.

        Returns ``(where bindings, conditions, rhs)``. In demand mode a
        trailing if-then-else absorbs ``rhs`` into both branches.
        """
        items = list(items)
        if not self.mode.binds:
            return [], [self.strict_goal(Goal(tuple(items)))] if items else [], rhs
        ite: IfThenElse | None = None
        for i, it in enumerate(items):
            if isinstance(it, IfThenElse):
                suffix = tuple(items[i + 1 :])
                ite = IfThenElse(it.cond, Goal(it.then.literals + suffix), Goal(it.else_.literals + suffix))
                items = items[:i]
                break
        translated = [self.item(lit) for lit in items]
        chosen = self._choose_bindings(translated, blocked)
        bound_here = {v for i in chosen for v in translated[i].bound}
        if ite is not None:
            inner_blocked = blocked | bound_here
            for t in translated:
                inner_blocked |= t.results
            rhs = EIf(
                self.ite_condition(ite.cond),
                self.branch(ite.then, rhs, inner_blocked),
                self.branch(ite.else_, rhs, inner_blocked),
            )
        conds = [t.cond for i, t in enumerate(translated) if i not in chosen]
        where = [t.binding for i, t in enumerate(translated) if i in chosen]
        # a binding nobody reads would silently drop its subgoal
        while True:
            used = occurrence_counts(conj(conds + [rhs] + [e for _, e in where]))
            unused = [
                i
                for i in sorted(chosen)
                if not any(used[v] for v in translated[i].bound)
            ]
            if not unused:
                break
            chosen -= set(unused)
            conds = [t.cond for i, t in enumerate(translated) if i not in chosen]
            where = [t.binding for i, t in enumerate(translated) if i in chosen]
        return where, conds, rhs  # type: ignore[return-value]

    def branch(self, g: Goal, rhs: Expr, blocked: set[str]) -> Expr:
        where, conds, value = self.body(g.literals, rhs, blocked)
        expr = EGuard(conj(conds), value) if conds else value
        return ELet(tuple(where), expr) if where else expr

    def _choose_bindings(self, items: list[_Item], blocked: set[str]) -> set[int]:
        chosen: set[int] = set()
        for i, it in enumerate(items):
            if it.binding is None:
                continue
            others: set[str] = set()
            for j, other in enumerate(items):
                if j != i:
                    others |= other.results
            if any(v in blocked or v in others or v in it.inputs for v in it.bound):
                continue
            chosen.add(i)
        # lazy bindings must not be mutually recursive
        while True:
            cycle = _find_cycle({i: items[i] for i in chosen})
            if cycle is None:
                return chosen
            chosen.discard(max(cycle))

    # -- clauses --------------------------------------------------------------
    def clause(self, c: Clause) -> Rule:
        key = c.key
        u = self.positions(key)
        fname = function_name(key)
        if u:
            results, rest = split_args(c.head, u)
            params = tuple(term_to_pattern(a) for a in rest)
            rhs: Expr = tuple_or_single([transform_term(r) for r in results])
        else:
            params = tuple(term_to_pattern(a) for a in c.head.args)
            rhs = TRUE
        blocked = {v for p in params for v in pattern_vars(p)}
        where, conds, rhs = self.body(c.body.literals, rhs, blocked)
        guard = conj(conds) if conds else None
        rule = Rule(fname, params, guard, rhs, tuple(where))
        if self.mode.binds and self.mode.inline:
            rule = inline_single_use(rule)
        return rule

    def goal(self, g: Goal) -> Expr:
        return self.strict_goal(g)


def _find_cycle(items: dict[int, _Item]) -> list[int] | None:
    definer = {v: i for i, it in items.items() for v in it.bound}
    deps = {i: {definer[v] for v in it.inputs if v in definer} for i, it in items.items()}
    state: dict[int, int] = {}
    stack: list[int] = []

    def visit(i: int) -> list[int] | None:
        state[i] = 1
        stack.append(i)
        for j in sorted(deps[i]):
            if state.get(j) == 1:
                return stack[stack.index(j) :]
            if j not in state:
                found = visit(j)
                if found:
                    return found
        stack.pop()
        state[i] = 2
        return None

    for i in sorted(items):
        if i not in state:
            found = visit(i)
            if found:
                return found
    return None


# ---------------------------------------------------------------------------
# inlining and desugaring


def _inline_bindings(
    bindings: list[tuple[Pattern, Expr]], exprs: list[Expr]
) -> tuple[list[tuple[Pattern, Expr]], list[Expr]]:
    """Inline single-use variable bindings into ``exprs`` and each other."""
    bindings = [(p, inline_expr(e)) for p, e in bindings]
    exprs = [inline_expr(e) for e in exprs]
    changed = True
    while changed:
        changed = False
        for i, (pat, value) in enumerate(bindings):
            if not isinstance(pat, PVar):
                continue
            others = [e for j, (_, e) in enumerate(bindings) if j != i]
            total = sum(occurrence_counts(e)[pat.name] for e in others + exprs)
            if total != 1 or occurrence_counts(value)[pat.name]:
                continue
            env = {pat.name: value}
            bindings = [(p, substitute(e, env)) for j, (p, e) in enumerate(bindings) if j != i]
            exprs = [substitute(e, env) for e in exprs]
            changed = True
            break
    return bindings, exprs


def inline_expr(e: Expr) -> Expr:
    """Inline single-use bindings of every ``let`` inside ``e``."""
    if isinstance(e, ELet):
        bindings, (body,) = _inline_bindings(list(e.bindings), [e.body])
        return ELet(tuple(bindings), body) if bindings else body
    if not any(isinstance(x, ELet) for x in walk_exprs(e)):
        return e
    from .flc import EConj, ETuple, EUnify as _EU

    if isinstance(e, ECons):
        return ECons(e.name, tuple(inline_expr(a) for a in e.args))
    if isinstance(e, EApply):
        return EApply(e.fname, tuple(inline_expr(a) for a in e.args))
    if isinstance(e, ETuple):
        return ETuple(tuple(inline_expr(a) for a in e.exprs))
    if isinstance(e, _EU):
        return _EU(inline_expr(e.lhs), inline_expr(e.rhs))
    if isinstance(e, EConj):
        return EConj(inline_expr(e.lhs), inline_expr(e.rhs))
    if isinstance(e, EGuard):
        return EGuard(inline_expr(e.cond), inline_expr(e.body))
    if isinstance(e, EIf):
        return EIf(inline_expr(e.cond), inline_expr(e.then), inline_expr(e.else_))
    if isinstance(e, EArith):
        return EArith(e.op, inline_expr(e.lhs), inline_expr(e.rhs))
    if isinstance(e, ECmp):
        return ECmp(e.op, inline_expr(e.lhs), inline_expr(e.rhs))
    return e


def inline_single_use(rule: Rule) -> Rule:
    exprs = [rule.rhs] if rule.guard is None else [rule.rhs, rule.guard]
    where, exprs = _inline_bindings(list(rule.where), exprs)
    guard = exprs[1] if rule.guard is not None else None
    return Rule(rule.fname, rule.params, guard, exprs[0], tuple(where))


def rule_var_names(rule: Rule) -> set[str]:
    names: set[str] = set()
    for e in rule_exprs(rule):
        for x in walk_exprs(e):
            if isinstance(x, EVar):
                names.add(x.name)
    for p, _ in rule.where:
        names.update(pattern_vars(p))
    return names


def desugar_nonlinear(rule: Rule) -> Rule:
    """Rename repeated pattern variables and add ``=:=`` constraints."""
    taken = rule_var_names(rule)
    seen: set[str] = set()
    equalities: list[Expr] = []

    def fresh(base: str) -> str:
        k = 1
        while f"{base}{k}" in taken:
            k += 1
        taken.add(f"{base}{k}")
        return f"{base}{k}"

    def linearize(p: Pattern) -> Pattern:
        if isinstance(p, PVar):
            if p.name in seen:
                new = fresh(p.name)
                equalities.append(EUnify(EVar(p.name), EVar(new)))
                return PVar(new)
            seen.add(p.name)
            return p
        if isinstance(p, PCons):
            return PCons(p.name, tuple(linearize(a) for a in p.args))
        return p

    params = tuple(linearize(p) for p in rule.params)
    if not equalities:
        return rule
    guard = conj(equalities + ([rule.guard] if rule.guard is not None else []))
    return Rule(rule.fname, params, guard, rule.rhs, rule.where)


# ---------------------------------------------------------------------------
# programs


def constructor_census(rules: Iterable[Rule]) -> tuple[tuple[str, int], ...]:
    seen: dict[tuple[str, int], None] = {}
    for r in rules:
        for e in rule_exprs(r):
            for x in walk_exprs(e):
                if isinstance(x, ECons) and (x.name, len(x.args)) not in LIST_CONSTRUCTORS:
                    seen.setdefault((x.name, len(x.args)), None)
    return tuple(seen)


def transform_program(program: LogicProgram, respos: ResPosMap, mode: TransformMode) -> FlcProgram:
    tr = _Translator(respos, mode)
    order: dict[tuple[str, int], list[Clause]] = {}
    for c in program.clauses:
        order.setdefault(c.key, []).append(c)
    rules = tuple(tr.clause(c) for clauses in order.values() for c in clauses)
    return FlcProgram(DataDecl("Term", constructor_census(rules)), rules)


def transform_conservative(program: LogicProgram) -> FlcProgram:
    return transform_program(program, {}, TransformMode(CONSERVATIVE))


def transform_functional(program: LogicProgram, respos: ResPosMap) -> FlcProgram:
    return transform_program(program, respos, TransformMode(FUNCTIONAL))


def transform_demand(program: LogicProgram, respos: ResPosMap, inline: bool = True) -> FlcProgram:
    return transform_program(program, respos, TransformMode(DEMAND, inline=inline))


def transform_goal(goal: Goal, respos: ResPosMap, mode: TransformMode) -> Expr:
    """Boolean expression for a goal; goal variables are never let-bound so
    their bindings remain observable."""
    return _Translator(respos, mode).goal(goal)


def translate_ite(ite: IfThenElse, respos: ResPosMap, mode: TransformMode, rhs: Expr = TRUE) -> Expr:
    tr = _Translator(respos, mode)
    if mode.binds:
        return tr.branch(Goal((ite,)), rhs, set())
    return tr.strict_goal(Goal((ite,)))


def goal_variables(goal: Goal) -> list[str]:
    return list(literal_vars(goal.literals))
