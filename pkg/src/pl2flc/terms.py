"""First-order terms, literals, clauses, substitutions and unification.

Everything here is immutable once built. The only mutable helper is
:class:`FreshNames`, which hands out variable names under the reserved
``__`` prefix (the Prolog reader refuses that prefix in user programs).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

RESERVED_PREFIX = "__"


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable name must be non-empty")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Num:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Comp:
    """A functor applied to arguments; atoms are ``Comp(name, ())``."""

    functor: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not self.functor:
            raise ValueError("functor name must be non-empty")

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Num, Comp]

NIL = Comp("[]")


def atom(name: str) -> Comp:
    return Comp(name, ())


def cons(head: Term, tail: Term) -> Comp:
    return Comp(".", (head, tail))


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    items = list(items)
    result = tail
    for item in reversed(items):
        result = cons(item, result)
    return result


def peano(n: int, zero: str = "o", succ: str = "s") -> Term:
    t: Term = atom(zero)
    for _ in range(n):
        t = Comp(succ, (t,))
    return t


@dataclass(frozen=True, slots=True)
class Literal:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    def as_term(self) -> Comp:
        return Comp(self.pred, self.args)

    def __str__(self) -> str:
        return format_term(self.as_term())


@dataclass(frozen=True, slots=True)
class IfThenElse:
    """``(Cond -> Then ; Else)`` as a body element; branches are goals."""

    cond: Goal
    then: Goal
    else_: Goal

    def __str__(self) -> str:
        return f"({self.cond} -> {self.then} ; {self.else_})"


BodyItem = Union[Literal, IfThenElse]


@dataclass(frozen=True, slots=True)
class Goal:
    literals: tuple[BodyItem, ...] = ()

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self) -> Iterator[BodyItem]:
        return iter(self.literals)

    def __str__(self) -> str:
        if not self.literals:
            return "true"
        return ", ".join(str(lit) for lit in self.literals)


@dataclass(frozen=True, slots=True)
class Clause:
    head: Literal
    body: Goal = field(default_factory=Goal)

    @property
    def is_fact(self) -> bool:
        return not self.body.literals

    @property
    def key(self) -> tuple[str, int]:
        return self.head.key

    def __str__(self) -> str:
        if self.is_fact:
            return f"{self.head}."
        return f"{self.head} :- {self.body}."


@dataclass(frozen=True, slots=True)
class Directive:
    pred: str
    arity: int
    respos: frozenset[int]

    def __post_init__(self) -> None:
        bad = [p for p in self.respos if not 1 <= p <= self.arity]
        if bad:
            raise ValueError(f"result positions {sorted(bad)} outside 1..{self.arity}")

    @property
    def key(self) -> tuple[str, int]:
        return (self.pred, self.arity)


@dataclass(frozen=True, slots=True)
class LogicProgram:
    clauses: tuple[Clause, ...] = ()
    directives: tuple[Directive, ...] = ()

    def predicates(self) -> list[tuple[str, int]]:
        """Defined predicates in order of first clause."""
        seen: dict[tuple[str, int], None] = {}
        for c in self.clauses:
            seen.setdefault(c.key, None)
        return list(seen)

    def clauses_for(self, key: tuple[str, int]) -> list[Clause]:
        return [c for c in self.clauses if c.key == key]


Substitution = dict[str, Term]


class FreshNames:
    """Monotone source of variable names that cannot clash with user names."""

    def __init__(self, tag: str = "G") -> None:
        self._tag = tag
        self._counter = itertools.count(1)

    def __call__(self) -> str:
        return f"{RESERVED_PREFIX}{self._tag}{next(self._counter)}"


def is_fresh_name(name: str) -> bool:
    return name.startswith(RESERVED_PREFIX)


# ---------------------------------------------------------------------------
# traversal


def term_vars(t: Term, acc: dict[str, None] | None = None) -> dict[str, None]:
    """Variable names of ``t`` in order of first occurrence (dict as ordered set)."""
    if acc is None:
        acc = {}
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            acc.setdefault(t.name, None)
        elif isinstance(t, Comp):
            stack.extend(reversed(t.args))
    return acc


def literal_vars(items: Iterable[BodyItem], acc: dict[str, None] | None = None) -> dict[str, None]:
    if acc is None:
        acc = {}
    for item in items:
        if isinstance(item, Literal):
            for a in item.args:
                term_vars(a, acc)
        else:
            literal_vars(item.cond, acc)
            literal_vars(item.then, acc)
            literal_vars(item.else_, acc)
    return acc


def clause_vars(c: Clause) -> dict[str, None]:
    acc: dict[str, None] = {}
    for a in c.head.args:
        term_vars(a, acc)
    return literal_vars(c.body, acc)


def occurs_in(name: str, t: Term) -> bool:
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, Comp):
        return any(occurs_in(name, a) for a in t.args)
    return False


def term_depth(t: Term) -> int:
    if isinstance(t, Comp) and t.args:
        return 1 + max(term_depth(a) for a in t.args)
    return 0


# ---------------------------------------------------------------------------
# substitutions


def walk(t: Term, bindings: Substitution) -> Term:
    while isinstance(t, Var):
        bound = bindings.get(t.name)
        if bound is None:
            return t
        t = bound
    return t


def resolve(t: Term, bindings: Substitution) -> Term:
    """Apply a triangular binding store completely."""
    t = walk(t, bindings)
    if isinstance(t, Comp) and t.args:
        args = tuple(resolve(a, bindings) for a in t.args)
        if any(x is not y for x, y in zip(args, t.args)):
            return Comp(t.functor, args)
    return t


def apply_subst(s: Substitution, t: Term) -> Term:
    if not s:
        return t
    return resolve(t, s)


def apply_literal(s: Substitution, lit: Literal) -> Literal:
    return Literal(lit.pred, tuple(apply_subst(s, a) for a in lit.args))


def apply_item(s: Substitution, item: BodyItem) -> BodyItem:
    if isinstance(item, Literal):
        return apply_literal(s, item)
    return IfThenElse(apply_goal(s, item.cond), apply_goal(s, item.then), apply_goal(s, item.else_))


def apply_goal(s: Substitution, g: Goal) -> Goal:
    return Goal(tuple(apply_item(s, x) for x in g.literals))


def apply_clause(s: Substitution, c: Clause) -> Clause:
    return Clause(apply_literal(s, c.head), apply_goal(s, c.body))


def occurs_bound(name: str, t: Term, bindings: Substitution) -> bool:
    """Whether variable ``name`` occurs in ``t`` under ``bindings``."""
    stack = [t]
    while stack:
        t = walk(stack.pop(), bindings)
        if isinstance(t, Var):
            if t.name == name:
                return True
        elif isinstance(t, Comp):
            stack.extend(t.args)
    return False


def unify_into(a: Term, b: Term, bindings: Substitution, trail: list[str] | None = None) -> bool:
    """Extend ``bindings`` (triangular form) so that ``a`` and ``b`` unify.

    Occurs check is always performed. On failure the store may be partially
    extended; callers that need to roll back pass a ``trail`` and undo it.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, bindings)
        y = walk(y, bindings)
        if x is y:
            continue
        if isinstance(x, Var):
            if isinstance(y, Var) and x.name == y.name:
                continue
            if occurs_bound(x.name, y, bindings):
                return False
            bindings[x.name] = y
            if trail is not None:
                trail.append(x.name)
        elif isinstance(y, Var):
            if occurs_bound(y.name, x, bindings):
                return False
            bindings[y.name] = x
            if trail is not None:
                trail.append(y.name)
        elif isinstance(x, Num):
            if not (isinstance(y, Num) and x.value == y.value):
                return False
        elif isinstance(y, Num):
            return False
        else:
            if x.functor != y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
    return True


def mgu(t1: Term, t2: Term) -> Substitution | None:
    """Most general unifier in idempotent form, or ``None``."""
    bindings: Substitution = {}
    if not unify_into(t1, t2, bindings):
        return None
    return {name: resolve(val, bindings) for name, val in bindings.items()}


def match(pattern: Term, t: Term, s: Substitution | None = None) -> Substitution | None:
    """One-way matching: find ``s`` with ``apply_subst(s, pattern) == t``."""
    s = {} if s is None else s
    stack = [(pattern, t)]
    while stack:
        p, u = stack.pop()
        if isinstance(p, Var):
            bound = s.get(p.name)
            if bound is None:
                s[p.name] = u
            elif bound != u:
                return None
        elif isinstance(p, Num):
            if p != u:
                return None
        else:
            if not isinstance(u, Comp) or u.functor != p.functor or len(u.args) != len(p.args):
                return None
            stack.extend(zip(p.args, u.args))
    return s


def rename_apart(c: Clause, avoid: Iterable[str] = (), fresh: FreshNames | None = None) -> Clause:
    """Variant of ``c`` whose variables are disjoint from ``avoid``."""
    fresh = fresh or FreshNames("R")
    avoid = set(avoid)
    names = clause_vars(c)
    if not names:
        return c
    ren: Substitution = {}
    for n in names:
        new = fresh()
        while new in avoid or new in names:
            new = fresh()
        ren[n] = Var(new)
    return apply_clause(ren, c)


def is_variant(a: Term, b: Term) -> bool:
    """True when ``a`` and ``b`` are equal up to a variable bijection."""
    fwd = match(a, b)
    if fwd is None or not all(isinstance(v, Var) for v in fwd.values()):
        return False
    targets = [v.name for v in fwd.values()]  # type: ignore[union-attr]
    return len(set(targets)) == len(targets)


def canonical(terms: Iterable[Term]) -> tuple[Term, ...]:
    """Rename variables to ``_0, _1, ...`` in order of first occurrence."""
    terms = tuple(terms)
    order: dict[str, None] = {}
    for t in terms:
        term_vars(t, order)
    ren = {n: Var(f"_{i}") for i, n in enumerate(order)}
    return tuple(apply_subst(ren, t) for t in terms)


# ---------------------------------------------------------------------------
# printing

_SYMBOL_CHARS = set("+-*/\\^<>=~:.?@#&$")


def _atom_text(name: str) -> str:
    if name in ("[]", "!", ";", ",", "{}"):
        return name if name != "," else "','"
    if name[0].islower() and all(ch.isalnum() or ch == "_" for ch in name):
        return name
    if all(ch in _SYMBOL_CHARS for ch in name):
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def format_var(name: str) -> str:
    if is_fresh_name(name):
        return "_" + name[len(RESERVED_PREFIX):]
    return name


def format_term(t: Term) -> str:
    """Prolog rendering in canonical functional notation (lists use brackets)."""
    if isinstance(t, Var):
        return format_var(t.name)
    if isinstance(t, Num):
        return str(t.value)
    if t.functor == "." and len(t.args) == 2:
        items = []
        cur: Term = t
        while isinstance(cur, Comp) and cur.functor == "." and len(cur.args) == 2:
            items.append(format_term(cur.args[0]))
            cur = cur.args[1]
        tail = "" if cur == NIL else "|" + format_term(cur)
        return "[" + ",".join(items) + tail + "]"
    name = _atom_text(t.functor)
    if not t.args:
        return name
    return name + "(" + ",".join(format_term(a) for a in t.args) + ")"
