"""Abstract syntax of the generated functional logic programs.

Identifiers keep their Prolog spelling here (``X``, ``s``, ``app/3``);
:mod:`pl2flc.codegen` maps them to target names when rendering.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


@dataclass(frozen=True, slots=True)
class EVar:
    name: str


@dataclass(frozen=True, slots=True)
class ENum:
    value: int


@dataclass(frozen=True, slots=True)
class ECons:
    name: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True, slots=True)
class EApply:
    fname: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True, slots=True)
class ETuple:
    exprs: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if len(self.exprs) < 2:
            raise ValueError("tuples have at least two components")


@dataclass(frozen=True, slots=True)
class EUnify:
    """Strict equality ``lhs =:= rhs``."""

    lhs: Expr
    rhs: Expr


@dataclass(frozen=True, slots=True)
class EConj:
    """Boolean conjunction ``lhs && rhs``."""

    lhs: Expr
    rhs: Expr


@dataclass(frozen=True, slots=True)
class EGuard:
    """Conditional expression ``cond &> body``."""

    cond: Expr
    body: Expr


@dataclass(frozen=True, slots=True)
class EIf:
    cond: Expr
    then: Expr
    else_: Expr


@dataclass(frozen=True, slots=True)
class ELet:
    bindings: tuple[tuple[Pattern, Expr], ...]
    body: Expr


@dataclass(frozen=True, slots=True)
class EArith:
    op: str  # + - * quot mod div
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True, slots=True)
class ECmp:
    op: str  # == /= < <= > >=
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True, slots=True)
class ETrue:
    pass


@dataclass(frozen=True, slots=True)
class EFalse:
    pass


Expr = Union[EVar, ENum, ECons, EApply, ETuple, EUnify, EConj, EGuard, EIf, ELet, EArith, ECmp, ETrue, EFalse]

TRUE = ETrue()
FALSE = EFalse()


@dataclass(frozen=True, slots=True)
class PVar:
    name: str


@dataclass(frozen=True, slots=True)
class PNum:
    value: int


@dataclass(frozen=True, slots=True)
class PCons:
    name: str
    args: tuple[Pattern, ...] = ()


@dataclass(frozen=True, slots=True)
class PTuple:
    patterns: tuple[Pattern, ...]


Pattern = Union[PVar, PNum, PCons, PTuple]


@dataclass(frozen=True, slots=True)
class Rule:
    """``fname params | guard = rhs where bindings``.

    ``where`` bindings scope over both guard and right-hand side.
    """

    fname: str
    params: tuple[Pattern, ...]
    guard: Expr | None
    rhs: Expr
    where: tuple[tuple[Pattern, Expr], ...] = ()


@dataclass(frozen=True, slots=True)
class DataDecl:
    typename: str = "Term"
    constructors: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        names = [c for c in self.constructors]
        if len(set(names)) != len(names):
            raise ValueError("duplicate constructor in data declaration")


@dataclass(frozen=True, slots=True)
class FlcProgram:
    datadecl: DataDecl = field(default_factory=DataDecl)
    rules: tuple[Rule, ...] = ()

    def functions(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rules:
            seen.setdefault(r.fname, None)
        return list(seen)

    def rules_for(self, fname: str) -> list[Rule]:
        return [r for r in self.rules if r.fname == fname]


# ---------------------------------------------------------------------------
# patterns <-> expressions


def pattern_vars(p: Pattern, acc: list[str] | None = None) -> list[str]:
    """Pattern variables in left-to-right order, with repetitions."""
    if acc is None:
        acc = []
    if isinstance(p, PVar):
        acc.append(p.name)
    elif isinstance(p, PCons):
        for a in p.args:
            pattern_vars(a, acc)
    elif isinstance(p, PTuple):
        for a in p.patterns:
            pattern_vars(a, acc)
    return acc


def pattern_to_expr(p: Pattern) -> Expr:
    if isinstance(p, PVar):
        return EVar(p.name)
    if isinstance(p, PNum):
        return ENum(p.value)
    if isinstance(p, PCons):
        return ECons(p.name, tuple(pattern_to_expr(a) for a in p.args))
    return ETuple(tuple(pattern_to_expr(a) for a in p.patterns))


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (ECons, EApply)):
        return e.args
    if isinstance(e, ETuple):
        return e.exprs
    if isinstance(e, (EUnify, EConj, EArith, ECmp)):
        return (e.lhs, e.rhs)
    if isinstance(e, EGuard):
        return (e.cond, e.body)
    if isinstance(e, EIf):
        return (e.cond, e.then, e.else_)
    if isinstance(e, ELet):
        return tuple(rhs for _, rhs in e.bindings) + (e.body,)
    return ()


def _occurrences(e: Expr, counter: Counter, bound: frozenset[str]) -> None:
    if isinstance(e, EVar):
        if e.name not in bound:
            counter[e.name] += 1
        return
    if isinstance(e, ELet):
        inner = bound | {v for p, _ in e.bindings for v in pattern_vars(p)}
        for _, rhs in e.bindings:
            _occurrences(rhs, counter, inner)
        _occurrences(e.body, counter, inner)
        return
    for c in children(e):
        _occurrences(c, counter, bound)


def occurrence_counts(e: Expr) -> Counter:
    counter: Counter = Counter()
    _occurrences(e, counter, frozenset())
    return counter


def free_vars(e: Expr) -> set[str]:
    return set(occurrence_counts(e))


def count_occurrences(name: str, e: Expr) -> int:
    return occurrence_counts(e)[name]


def substitute(e: Expr, env: dict[str, Expr]) -> Expr:
    """Capture-avoiding only in the trivial sense: names bound by a nested
    ``ELet`` shadow ``env``."""
    if not env:
        return e
    if isinstance(e, EVar):
        return env.get(e.name, e)
    if isinstance(e, (ENum, ETrue, EFalse)):
        return e
    if isinstance(e, ECons):
        return ECons(e.name, tuple(substitute(a, env) for a in e.args))
    if isinstance(e, EApply):
        return EApply(e.fname, tuple(substitute(a, env) for a in e.args))
    if isinstance(e, ETuple):
        return ETuple(tuple(substitute(a, env) for a in e.exprs))
    if isinstance(e, EUnify):
        return EUnify(substitute(e.lhs, env), substitute(e.rhs, env))
    if isinstance(e, EConj):
        return EConj(substitute(e.lhs, env), substitute(e.rhs, env))
    if isinstance(e, EGuard):
        return EGuard(substitute(e.cond, env), substitute(e.body, env))
    if isinstance(e, EIf):
        return EIf(substitute(e.cond, env), substitute(e.then, env), substitute(e.else_, env))
    if isinstance(e, EArith):
        return EArith(e.op, substitute(e.lhs, env), substitute(e.rhs, env))
    if isinstance(e, ECmp):
        return ECmp(e.op, substitute(e.lhs, env), substitute(e.rhs, env))
    if isinstance(e, ELet):
        shadow = {v for p, _ in e.bindings for v in pattern_vars(p)}
        inner = {k: v for k, v in env.items() if k not in shadow}
        return ELet(tuple((p, substitute(r, inner)) for p, r in e.bindings), substitute(e.body, inner))
    raise TypeError(f"not an expression: {e!r}")


def conj(exprs: Iterable[Expr]) -> Expr:
    """Right-nested ``&&`` chain; the empty conjunction is ``True``."""
    items = list(exprs)
    if not items:
        return TRUE
    result = items[-1]
    for item in reversed(items[:-1]):
        result = EConj(item, result)
    return result


def conjuncts(e: Expr) -> list[Expr]:
    if isinstance(e, EConj):
        return conjuncts(e.lhs) + conjuncts(e.rhs)
    return [e]


def tuple_or_single(items: list[Expr]) -> Expr:
    return items[0] if len(items) == 1 else ETuple(tuple(items))


def ptuple_or_single(items: list[Pattern]) -> Pattern:
    return items[0] if len(items) == 1 else PTuple(tuple(items))


def walk_exprs(e: Expr) -> Iterator[Expr]:
    yield e
    for c in children(e):
        yield from walk_exprs(c)


def rule_exprs(r: Rule) -> Iterator[Expr]:
    for p in r.params:
        yield pattern_to_expr(p)
    for p, rhs in r.where:
        yield pattern_to_expr(p)
        yield rhs
    if r.guard is not None:
        yield r.guard
    yield r.rhs
