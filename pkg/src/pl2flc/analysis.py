"""Definitional trees and result argument position inference.

A predicate is turned into a function only when some of its arguments
discriminate the clauses uniquely (an inductively sequential argument set)
and some other arguments remain to act as results.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .terms import (
    Clause,
    Comp,
    FreshNames,
    IfThenElse,
    Literal,
    LogicProgram,
    Num,
    Term,
    Var,
)

Position = tuple[int, ...]
FunctorKey = Union[str, int]  # atom/functor name, or the value of a number
ResPosMap = dict[tuple[str, int], frozenset[int]]


@dataclass(frozen=True)
class ClauseNode:
    clause: Clause


@dataclass(frozen=True)
class BranchNode:
    literal: Literal
    pos: Position
    children: tuple[tuple[FunctorKey, int, "DefTree"], ...]


DefTree = Union[ClauseNode, BranchNode]


def _subterm(args: Sequence[Term], pos: Position) -> Term | None:
    """Subterm of an argument list at a 1-based path; ``None`` if the path
    runs through a variable or off the term."""
    items: Sequence[Term] = args
    t: Term | None = None
    for k in pos:
        if k > len(items):
            return None
        t = items[k - 1]
        items = t.args if isinstance(t, Comp) else ()
    return t


def _replace(args: tuple[Term, ...], pos: Position, new: Term) -> tuple[Term, ...]:
    k = pos[0] - 1
    if len(pos) == 1:
        return args[:k] + (new,) + args[k + 1 :]
    inner = args[k]
    assert isinstance(inner, Comp)
    return args[:k] + (Comp(inner.functor, _replace(inner.args, pos[1:], new)),) + args[k + 1 :]


def _var_positions(args: Sequence[Term], prefix: Position = ()) -> list[Position]:
    out = []
    for i, a in enumerate(args, 1):
        if isinstance(a, Var):
            out.append(prefix + (i,))
        elif isinstance(a, Comp):
            out.extend(_var_positions(a.args, prefix + (i,)))
    return out


def functor_key(t: Term | None) -> tuple[FunctorKey, int] | None:
    if isinstance(t, Comp):
        return (t.functor, len(t.args))
    if isinstance(t, Num):
        return (t.value, 0)
    return None


def _instantiate(key: tuple[FunctorKey, int], fresh: FreshNames) -> Term:
    f, n = key
    if isinstance(f, int):
        return Num(f)
    return Comp(f, tuple(Var(fresh()) for _ in range(n)))


def _build(
    lit: Literal, clauses: list[Clause], allowed: frozenset[int], fresh: FreshNames
) -> DefTree | None:
    if len(clauses) == 1:
        return ClauseNode(clauses[0])
    # refinements every clause agrees on never constrain the choice
    changed = True
    while changed:
        changed = False
        for pos in _var_positions(lit.args):
            keys = {functor_key(_subterm(c.head.args, pos)) for c in clauses}
            if None not in keys and len(keys) == 1:
                key = keys.pop()
                assert key is not None
                lit = Literal(lit.pred, _replace(lit.args, pos, _instantiate(key, fresh)))
                changed = True
                break
    for pos in _var_positions(lit.args):
        if pos[0] not in allowed:
            continue
        subterms = [_subterm(c.head.args, pos) for c in clauses]
        keys = [functor_key(t) for t in subterms]
        if None in keys:
            continue
        groups: dict[tuple[FunctorKey, int], list[Clause]] = {}
        for key, c in zip(keys, clauses):
            groups.setdefault(key, []).append(c)  # type: ignore[arg-type]
        kids = []
        for key, group in groups.items():
            child_lit = Literal(lit.pred, _replace(lit.args, pos, _instantiate(key, fresh)))
            sub = _build(child_lit, group, allowed, fresh)
            if sub is None:
                break
            kids.append((key[0], key[1], sub))
        else:
            return BranchNode(lit, pos, tuple(kids))
    return None


def build_def_tree(heads: Sequence[Clause], allowed: Iterable[int] | None = None) -> DefTree | None:
    """Definitional tree whose multi-child branches lie at or below ``allowed``.

    Single-child branch nodes are never emitted. Returns ``None`` when the
    clauses are not inductively sequential with respect to ``allowed``.
    """
    if not heads:
        raise ValueError("a definitional tree needs at least one clause")
    pred, n = heads[0].key
    if any(c.key != (pred, n) for c in heads):
        raise ValueError("all clauses must define the same predicate")
    fresh = FreshNames("D")
    allowed_set = frozenset(range(1, n + 1)) if allowed is None else frozenset(allowed)
    root = Literal(pred, tuple(Var(fresh()) for _ in range(n)))
    return _build(root, list(heads), allowed_set, fresh)


def tree_clauses(tree: DefTree) -> list[Clause]:
    if isinstance(tree, ClauseNode):
        return [tree.clause]
    return [c for _, _, sub in tree.children for c in tree_clauses(sub)]


def minimal_indseq_sets(heads: Sequence[Clause]) -> list[frozenset[int]]:
    """All inclusion-minimal inductively sequential argument sets."""
    n = heads[0].head.arity
    full = range(1, n + 1)
    if build_def_tree(heads, full) is None:
        return []
    found: list[frozenset[int]] = []
    for size in range(n + 1):
        for combo in itertools.combinations(full, size):
            d = frozenset(combo)
            if any(m <= d for m in found):
                continue
            if build_def_tree(heads, d) is not None:
                found.append(d)
    return found


def choose_indseq_set(sets: list[frozenset[int]]) -> frozenset[int] | None:
    if not sets:
        return None
    return min(sets, key=lambda s: tuple(sorted(s)))


# ---------------------------------------------------------------------------
# result positions


@dataclass(frozen=True)
class PredInfo:
    key: tuple[str, int]
    indseq: frozenset[int] | None
    respos: frozenset[int]
    source: str  # directive | single-rule | heuristic | none

    def report_line(self) -> str:
        name, n = self.key
        d = "-" if self.indseq is None else _fmt_set(self.indseq)
        return f"{name}/{n}: indseq={d} respos={_fmt_set(self.respos)} source={self.source}"


def _fmt_set(s: Iterable[int]) -> str:
    return "{" + ",".join(str(k) for k in sorted(s)) + "}"


BUILTIN_RESPOS: ResPosMap = {("is", 2): frozenset({1})}
EMPTY: frozenset[int] = frozenset()


def _result_vars(items: Iterable, lookup) -> set[str]:
    out: set[str] = set()
    for item in items:
        if isinstance(item, IfThenElse):
            out |= _result_vars(item.cond, lookup)
            out |= _result_vars(item.then, lookup)
            out |= _result_vars(item.else_, lookup)
            continue
        assert isinstance(item, Literal)
        for k in lookup(item.key):
            arg = item.args[k - 1]
            if isinstance(arg, Var):
                out.add(arg.name)
    return out


def analyze(program: LogicProgram, infer: bool = True) -> dict[tuple[str, int], PredInfo]:
    """Per-predicate inference record, in order of first definition."""
    directives = {d.key: d.respos for d in program.directives}
    by_key: dict[tuple[str, int], list[Clause]] = {}
    for c in program.clauses:
        by_key.setdefault(c.key, []).append(c)
    infos: dict[tuple[str, int], PredInfo] = {}
    in_progress: set[tuple[str, int]] = set()

    def indseq(key: tuple[str, int]) -> frozenset[int] | None:
        clauses = by_key.get(key)
        if not clauses:
            return None
        return choose_indseq_set(minimal_indseq_sets(clauses))

    def lookup(key: tuple[str, int]) -> frozenset[int]:
        if key in BUILTIN_RESPOS:
            return BUILTIN_RESPOS[key]
        if key in directives:
            return directives[key]
        if key not in by_key or key in in_progress:
            return EMPTY
        return info(key).respos

    def info(key: tuple[str, int]) -> PredInfo:
        if key in infos:
            return infos[key]
        in_progress.add(key)
        try:
            infos[key] = _infer_one(key)
        finally:
            in_progress.discard(key)
        return infos[key]

    def _infer_one(key: tuple[str, int]) -> PredInfo:
        clauses = by_key[key]
        d = indseq(key)
        if key in directives:
            return PredInfo(key, d, directives[key], "directive")
        if not infer:
            return PredInfo(key, d, EMPTY, "none")
        n = key[1]
        if len(clauses) == 1:
            c = clauses[0]
            if n == 0:
                return PredInfo(key, d, EMPTY, "none")
            last = c.head.args[-1]
            if not isinstance(last, Var) or last.name in _result_vars(c.body, lookup):
                return PredInfo(key, d, frozenset({n}), "single-rule")
            return PredInfo(key, d, EMPTY, "none")
        if d is None:
            return PredInfo(key, d, EMPTY, "none")
        rest = set(range(1, n + 1)) - d
        if not rest:
            return PredInfo(key, d, EMPTY, "none")
        return PredInfo(key, d, frozenset({max(rest)}), "heuristic")

    for key in by_key:
        info(key)
    return {key: infos[key] for key in by_key}


def infer_respos(program: LogicProgram, infer: bool = True) -> ResPosMap:
    table = {k: v.respos for k, v in analyze(program, infer).items()}
    for d in program.directives:
        table.setdefault(d.key, d.respos)
    return table


def explain(program: LogicProgram, infer: bool = True) -> str:
    return "".join(info.report_line() + "\n" for info in analyze(program, infer).values())
