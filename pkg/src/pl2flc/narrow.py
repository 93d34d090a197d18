"""Lazy narrowing interpreter for generated functional logic programs.

Expressions live in a heap of cells. Reducing a cell overwrites it, so work
is shared and a computation can be resumed from its root at any time. A
non-deterministic choice (rule alternatives, or instantiating a free variable
demanded by a pattern) stops the current run; the driver then copies the
reachable heap once per alternative and queues the copies. Runs are cut into
step quanta and queued breadth-first, which keeps the search fair.

Step accounting: one step per rule application, builtin reduction, or
variable instantiation. Choosing between rules, projecting tuple components
and following indirections are free.
"""

from __future__ import annotations

import sys
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .analysis import BranchNode, ClauseNode, build_def_tree
from .flc import (
    EApply,
    EArith,
    ECmp,
    ECons,
    EConj,
    EFalse,
    EGuard,
    EIf,
    ELet,
    ENum,
    ETrue,
    ETuple,
    EUnify,
    EVar,
    Expr,
    FlcProgram,
    Pattern,
    PCons,
    PNum,
    PTuple,
    PVar,
    Rule,
    free_vars,
)
from .sld import Limits, Status
from .terms import Clause, Comp, Literal, Num, Term, Var
from .transform import desugar_nonlinear

ANON = "_"
FREE = ("free",)
TRUE_NODE = ("con", "True", ())
FALSE_NODE = ("con", "False", ())
QUANTUM = 256


class NarrowError(Exception):
    """Ill-formed program or query (a transformer bug, not a failed branch)."""


class _Fail(Exception):
    pass


class _Suspend(Exception):
    pass


class _Yield(Exception):
    pass


class _Depth(Exception):
    pass


class _Budget(Exception):
    pass


class _Choice(Exception):
    def __init__(self, alternatives: list[Callable[["_State"], None]]) -> None:
        self.alternatives = alternatives


@dataclass
class _State:
    heap: dict[int, tuple]
    root: int
    qvars: dict[str, int]
    steps: int = 0
    next_id: int = 0

    def alloc(self, node: tuple) -> int:
        cid = self.next_id
        self.next_id += 1
        self.heap[cid] = node
        return cid

    def roots(self) -> list[int]:
        return [self.root, *self.qvars.values()]

    def copy(self, reachable: set[int]) -> "_State":
        heap = self.heap
        return _State({k: heap[k] for k in reachable}, self.root, dict(self.qvars), self.steps, self.next_id)


def _node_children(node: tuple) -> tuple[int, ...]:
    tag = node[0]
    if tag in ("con", "app"):
        return node[2]
    if tag == "pin":
        return node[3]
    if tag == "tup":
        return node[1]
    if tag == "ind":
        return (node[1],)
    if tag in ("unify", "conj", "guard"):
        return node[1:3]
    if tag == "if":
        return node[1:4]
    if tag in ("arith", "cmp"):
        return node[2:4]
    if tag == "sel":
        return (node[2],)
    if tag == "let":
        return ()
    return ()


def _reachable(st: _State) -> set[int]:
    seen: set[int] = set()
    stack = st.roots()
    heap = st.heap
    while stack:
        c = stack.pop()
        if c in seen:
            continue
        seen.add(c)
        stack.extend(_node_children(heap[c]))
    return seen


# ---------------------------------------------------------------------------
# program preparation


def _pattern_term(p: Pattern, counter: list[int]) -> Term:
    if isinstance(p, PVar):
        if p.name == ANON:
            counter[0] += 1
            return Var(f"__W{counter[0]}")
        return Var(p.name)
    if isinstance(p, PNum):
        return Num(p.value)
    if isinstance(p, PCons):
        return Comp(p.name, tuple(_pattern_term(a, counter) for a in p.args))
    return Comp("(,)", tuple(_pattern_term(a, counter) for a in p.patterns))


@dataclass
class _Function:
    rules: list[Rule]
    tree: object | None  # definitional tree over rule indices, or None
    leaf_index: dict[int, int] = field(default_factory=dict)


def prepare(program: FlcProgram) -> dict[str, _Function]:
    table: dict[str, _Function] = {}
    for fname in program.functions():
        rules = [desugar_nonlinear(r) for r in program.rules_for(fname)]
        counter = [0]
        clauses = [Clause(Literal(fname, tuple(_pattern_term(p, counter) for p in r.params))) for r in rules]
        tree = build_def_tree(clauses) if all(not isinstance(p, PTuple) for r in rules for p in r.params) else None
        fn = _Function(rules, tree)
        fn.leaf_index = {id(c): i for i, c in enumerate(clauses)}
        table[fname] = fn
    return table


# ---------------------------------------------------------------------------
# the machine


def _subterm(t: Term, path: tuple[int, ...]) -> Term:
    for k in path:
        assert isinstance(t, Comp)
        t = t.args[k - 1]
    return t


class _Machine:
    def __init__(self, fns: dict[str, _Function], st: _State, driver: "_Driver") -> None:
        self.fns = fns
        self.st = st
        self.heap = st.heap
        self.driver = driver
        self.quota = QUANTUM

    # -- bookkeeping ----------------------------------------------------------
    def tick(self) -> None:
        d = self.driver
        if d.total_steps >= d.limits.max_steps:
            raise _Budget
        if self.st.steps >= d.limits.max_depth:
            raise _Depth
        if self.quota <= 0:
            raise _Yield
        self.quota -= 1
        self.st.steps += 1
        d.total_steps += 1

    def deref(self, c: int) -> int:
        heap = self.heap
        node = heap[c]
        while node[0] == "ind":
            c = node[1]
            node = heap[c]
        return c

    # -- building -------------------------------------------------------------
    def build(self, e: Expr, env: dict[str, int]) -> int:
        alloc = self.st.alloc
        b = self.build
        if isinstance(e, EVar):
            if e.name == ANON:
                return alloc(FREE)
            if e.name not in env:
                env[e.name] = alloc(FREE)  # extra variable
            return env[e.name]
        if isinstance(e, ENum):
            return alloc(("int", e.value))
        if isinstance(e, ECons):
            return alloc(("con", e.name, tuple(b(a, env) for a in e.args)))
        if isinstance(e, EApply):
            return alloc(("app", e.fname, tuple(b(a, env) for a in e.args)))
        if isinstance(e, ETuple):
            return alloc(("tup", tuple(b(a, env) for a in e.exprs)))
        if isinstance(e, ETrue):
            return alloc(TRUE_NODE)
        if isinstance(e, EFalse):
            return alloc(FALSE_NODE)
        if isinstance(e, EUnify):
            return alloc(("unify", b(e.lhs, env), b(e.rhs, env)))
        if isinstance(e, EConj):
            return alloc(("conj", b(e.lhs, env), b(e.rhs, env)))
        if isinstance(e, EGuard):
            return alloc(("guard", b(e.cond, env), b(e.body, env)))
        if isinstance(e, EIf):
            return alloc(("if", b(e.cond, env), b(e.then, env), b(e.else_, env)))
        if isinstance(e, EArith):
            return alloc(("arith", e.op, b(e.lhs, env), b(e.rhs, env)))
        if isinstance(e, ECmp):
            return alloc(("cmp", e.op, b(e.lhs, env), b(e.rhs, env)))
        if isinstance(e, ELet):
            env = dict(env)
            self.bind_locals(e.bindings, env)
            return b(e.body, env)
        raise NarrowError(f"cannot evaluate {e!r}")

    def bind_locals(self, bindings, env: dict[str, int]) -> None:
        """Allocate lazy cells for (possibly mutually recursive) bindings."""
        alloc = self.st.alloc
        holders = []
        for pat, rhs in bindings:
            cell = alloc(FREE)
            holders.append((cell, rhs))
            self._bind_pattern(pat, cell, env)
        for cell, rhs in holders:
            built = self.build(rhs, env)
            self.heap[cell] = ("ind", built)

    def _bind_pattern(self, pat: Pattern, cell: int, env: dict[str, int]) -> None:
        if isinstance(pat, PVar):
            if pat.name != ANON:
                env[pat.name] = cell
        elif isinstance(pat, PTuple):
            for i, sub in enumerate(pat.patterns):
                self._bind_pattern(sub, self.st.alloc(("sel", i, cell)), env)
        else:
            raise NarrowError("local bindings must bind variables or tuples of variables")

    # -- evaluation -----------------------------------------------------------
    def hnf(self, c: int) -> int:
        heap = self.heap
        while True:
            node = heap[c]
            tag = node[0]
            if tag == "ind":
                target = self.deref(node[1])
                heap[c] = ("ind", target)
                c = target
                continue
            if tag in ("con", "int", "tup", "free"):
                return c
            heap[c] = self.reduce(c, node)

    def reduce(self, c: int, node: tuple) -> tuple:
        tag = node[0]
        heap = self.heap
        if tag == "app":
            fn = self.fns.get(node[1])
            if fn is None or not fn.rules:
                raise _Fail
            args = node[2]
            if fn.tree is not None:
                idx = self.select(fn, fn.tree, args)
            elif len(fn.rules) == 1:
                idx = 0
            else:
                fname = node[1]

                def pin(i: int) -> Callable[[_State], None]:
                    def apply(st: _State) -> None:
                        st.heap[c] = ("pin", fname, i, args)

                    return apply

                raise _Choice([pin(i) for i in range(len(fn.rules))])
            return self.fire(fn.rules[idx], args)
        if tag == "pin":
            return self.fire(self.fns[node[1]].rules[node[2]], node[3])
        if tag == "unify":
            return self.unify(node[1], node[2])
        if tag in ("conj", "guard", "if"):
            h = self.hnf(node[1])
            cond = heap[h]
            if cond[0] == "free":
                raise _Suspend
            if cond[0] != "con" or cond[1] not in ("True", "False"):
                raise NarrowError("condition is not a Boolean")
            self.tick()
            truth = cond[1] == "True"
            if tag == "conj":
                return ("ind", node[2]) if truth else FALSE_NODE
            if tag == "guard":
                if not truth:
                    raise _Fail
                return ("ind", node[2])
            return ("ind", node[2] if truth else node[3])
        if tag == "arith":
            a, b = self.hnf(node[2]), self.hnf(node[3])
            x, y = heap[a], heap[b]
            if x[0] == "free" or y[0] == "free":
                raise _Suspend
            if x[0] != "int" or y[0] != "int":
                raise _Fail
            self.tick()
            return ("int", _arith(node[1], x[1], y[1]))
        if tag == "cmp":
            return self.compare(node[1], node[2], node[3])
        if tag == "sel":
            h = self.hnf(node[2])
            t = heap[h]
            if t[0] != "tup":
                raise NarrowError("tuple pattern matched against a non-tuple")
            if node[1] >= len(t[1]):
                raise NarrowError("tuple pattern of the wrong arity")
            return ("ind", t[1][node[1]])
        raise NarrowError(f"unknown node {tag!r}")

    def compare(self, op: str, a: int, b: int) -> tuple:
        heap = self.heap
        ha, hb = self.hnf(a), self.hnf(b)
        x, y = heap[ha], heap[hb]
        if x[0] == "free" or y[0] == "free":
            raise _Suspend
        self.tick()
        if x[0] == "int" and y[0] == "int":
            return TRUE_NODE if _COMPARE[op](x[1], y[1]) else FALSE_NODE
        if op not in ("==", "/="):
            raise _Fail
        if op == "/=":
            raise NarrowError("/= is only supported on integers")
        if x[0] != y[0]:
            return FALSE_NODE
        if x[0] == "tup":
            xs, ys = x[1], y[1]
        else:
            if x[1] != y[1] or len(x[2]) != len(y[2]):
                return FALSE_NODE
            xs, ys = x[2], y[2]
        if len(xs) != len(ys):
            return FALSE_NODE
        alloc = self.st.alloc
        cells = [alloc(("cmp", "==", p, q)) for p, q in zip(xs, ys)]
        return self._conj_node(cells)

    def _conj_node(self, cells: list[int]) -> tuple:
        if not cells:
            return TRUE_NODE
        alloc = self.st.alloc
        result = cells[-1]
        for cell in reversed(cells[:-1]):
            result = alloc(("conj", cell, result))
        return ("ind", result)

    def _occurs(self, var: int, c: int) -> bool:
        """Does free cell ``var`` occur in the evaluated part of ``c``?"""
        heap = self.heap
        stack = [c]
        seen: set[int] = set()
        while stack:
            c = self.deref(stack.pop())
            if c == var:
                return True
            if c in seen:
                continue
            seen.add(c)
            node = heap[c]
            if node[0] == "con":
                stack.extend(node[2])
            elif node[0] == "tup":
                stack.extend(node[1])
        return False

    def unify(self, a: int, b: int) -> tuple:
        heap = self.heap
        ha = self.hnf(a)
        hb = self.hnf(b)
        if ha == hb:
            self.tick()
            return TRUE_NODE
        x, y = heap[ha], heap[hb]
        if x[0] != "free" and y[0] == "free":
            ha, hb, x, y = hb, ha, y, x
        if x[0] == "free":
            if y[0] != "free":
                # bind to the shared normal form instead of copying it
                self.nf(hb)
                if heap[self.deref(ha)][0] != "free":
                    return ("unify", a, b)
                if self._occurs(ha, hb):
                    raise _Fail
            self.tick()
            heap[ha] = ("ind", hb)
            return TRUE_NODE
        self.tick()
        if x[0] != y[0]:
            raise _Fail
        if x[0] == "int":
            if x[1] != y[1]:
                raise _Fail
            return TRUE_NODE
        if x[0] == "tup":
            xs, ys = x[1], y[1]
        else:
            if x[1] != y[1] or len(x[2]) != len(y[2]):
                raise _Fail
            xs, ys = x[2], y[2]
        if len(xs) != len(ys):
            raise NarrowError("tuples of different arity")
        alloc = self.st.alloc
        return self._conj_node([alloc(("unify", p, q)) for p, q in zip(xs, ys)])

    # -- pattern matching -------------------------------------------------------
    def _instantiate(self, cell: int, key: tuple) -> None:
        """Bind free ``cell`` to the constructor ``key`` with fresh arguments."""
        self.tick()
        name, arity = key
        if isinstance(name, int):
            self.heap[cell] = ("int", name)
        else:
            alloc = self.st.alloc
            self.heap[cell] = ("con", name, tuple(alloc(FREE) for _ in range(arity)))

    def select(self, fn: _Function, tree, args: tuple[int, ...]) -> int:
        """Walk the definitional tree; returns the index of the rule to try."""
        heap = self.heap
        node = tree
        while isinstance(node, BranchNode):
            path = node.pos
            cell = args[path[0] - 1]
            for depth in range(1, len(path)):
                h = self.hnf(cell)
                want = _subterm(node.literal.as_term(), path[:depth])
                assert isinstance(want, Comp)
                content = heap[h]
                if content[0] == "free":
                    self._instantiate(h, (want.functor, len(want.args)))
                    content = heap[h]
                if content[0] != "con" or content[1] != want.functor or len(content[2]) != len(want.args):
                    raise _Fail
                cell = content[2][path[depth] - 1]
            h = self.hnf(cell)
            content = heap[h]
            if content[0] == "free":
                keys = [(f, n) for f, n, _ in node.children]

                def inst(key: tuple, cell: int = h) -> Callable[[_State], None]:
                    def apply(st: _State) -> None:
                        st.steps += 1
                        self.driver.total_steps += 1
                        name, arity = key
                        if isinstance(name, int):
                            st.heap[cell] = ("int", name)
                        else:
                            st.heap[cell] = ("con", name, tuple(st.alloc(FREE) for _ in range(arity)))

                    return apply

                raise _Choice([inst(k) for k in keys])
            if content[0] == "con":
                key = (content[1], len(content[2]))
            elif content[0] == "int":
                key = (content[1], 0)
            else:
                raise _Fail
            for f, n, sub in node.children:
                if (f, n) == key:
                    node = sub
                    break
            else:
                raise _Fail
        assert isinstance(node, ClauseNode)
        return fn.leaf_index[id(node.clause)]

    def match(self, pat: Pattern, cell: int, env: dict[str, int]) -> None:
        if isinstance(pat, PVar):
            if pat.name != ANON:
                env[pat.name] = cell
            return
        h = self.hnf(cell)
        content = self.heap[h]
        if isinstance(pat, PNum):
            if content[0] == "free":
                self._instantiate(h, (pat.value, 0))
            elif content != ("int", pat.value):
                raise _Fail
            return
        if isinstance(pat, PTuple):
            if content[0] != "tup" or len(content[1]) != len(pat.patterns):
                raise NarrowError("tuple pattern of the wrong arity")
            for p, c in zip(pat.patterns, content[1]):
                self.match(p, c, env)
            return
        if content[0] == "free":
            self._instantiate(h, (pat.name, len(pat.args)))
            content = self.heap[h]
        if content[0] != "con" or content[1] != pat.name or len(content[2]) != len(pat.args):
            raise _Fail
        for p, c in zip(pat.args, content[2]):
            self.match(p, c, env)

    def fire(self, rule: Rule, args: tuple[int, ...]) -> tuple:
        if len(rule.params) != len(args):
            raise NarrowError(f"{rule.fname} applied to {len(args)} arguments, expects {len(rule.params)}")
        env: dict[str, int] = {}
        for p, a in zip(rule.params, args):
            self.match(p, a, env)
        self.tick()
        if rule.where:
            self.bind_locals(rule.where, env)
        body = rule.rhs if rule.guard is None else EGuard(rule.guard, rule.rhs)
        return ("ind", self.build(body, env))

    def nf(self, c: int) -> None:
        heap = self.heap
        stack = [c]
        while stack:
            h = self.hnf(stack.pop())
            node = heap[h]
            if node[0] == "con":
                stack.extend(reversed(node[2]))
            elif node[0] == "tup":
                stack.extend(reversed(node[1]))


def _arith(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        raise _Fail
    if op == "quot":
        q = abs(a) // abs(b)
        return q if (a >= 0) == (b >= 0) else -q
    if op == "div":
        return a // b
    if op == "mod":
        return a % b
    raise NarrowError(f"unknown arithmetic operator {op}")


_COMPARE = {
    "==": lambda a, b: a == b,
    "/=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


# ---------------------------------------------------------------------------
# read back


def _readback(st: _State, c: int, names: dict[int, str]) -> Expr:
    heap = st.heap
    while heap[c][0] == "ind":
        c = heap[c][1]
    node = heap[c]
    tag = node[0]
    if tag == "free":
        if c not in names:
            names[c] = f"_{len(names)}"
        return EVar(names[c])
    if tag == "int":
        return ENum(node[1])
    if tag == "tup":
        return ETuple(tuple(_readback(st, a, names) for a in node[1]))
    if tag == "con":
        if not node[2] and node[1] == "True":
            return ETrue()
        if not node[2] and node[1] == "False":
            return EFalse()
        return ECons(node[1], tuple(_readback(st, a, names) for a in node[2]))
    raise NarrowError("value is not in normal form")


@dataclass(frozen=True)
class NarrowResult:
    value: Expr
    subst: dict[str, Expr]
    steps: int

    def render(self) -> str:
        from .codegen import render_value

        text = render_value(self.value)
        if not self.subst:
            return text
        binds = ", ".join(f"{n} -> {render_value(v)}" for n, v in sorted(self.subst.items()))
        return f"{text}  where {{{binds}}}"


@dataclass
class NarrowOutcome:
    results: list[NarrowResult] = field(default_factory=list)
    status: Status = Status.EXHAUSTED
    total_steps: int = 0
    suspended: int = 0

    def render(self) -> str:
        lines = [r.render() for r in self.results]
        tail = f"status: {self.status.value} steps={self.total_steps}"
        if self.suspended:
            tail += f" suspended={self.suspended}"
        lines.append(tail)
        return "\n".join(lines) + "\n"


class _Driver:
    def __init__(self, fns: dict[str, _Function], limits: Limits) -> None:
        self.fns = fns
        self.limits = limits
        self.total_steps = 0

    def run(self, query: Expr) -> NarrowOutcome:
        heap: dict[int, tuple] = {}
        st = _State(heap, -1, {})
        env: dict[str, int] = {}
        for name in sorted(free_vars(query)):
            if name != ANON:
                env[name] = st.alloc(FREE)
        st.qvars = dict(env)
        machine = _Machine(self.fns, st, self)
        st.root = machine.build(query, env)
        out = NarrowOutcome()
        queue = deque([st])
        cut_off = False
        while queue:
            st = queue.popleft()
            m = _Machine(self.fns, st, self)
            try:
                m.nf(st.root)
                for c in st.qvars.values():
                    m.nf(c)
            except _Choice as choice:
                reach = _reachable(st)
                for alt in choice.alternatives:
                    branch = st.copy(reach)
                    alt(branch)
                    queue.append(branch)
                continue
            except _Fail:
                continue
            except _Suspend:
                out.suspended += 1
                continue
            except _Yield:
                queue.append(st)
                continue
            except _Depth:
                cut_off = True
                continue
            except _Budget:
                out.status = Status.STEP_LIMIT
                break
            names: dict[int, str] = {}
            value = _readback(st, st.root, names)
            subst = {n: _readback(st, c, names) for n, c in sorted(st.qvars.items())}
            out.results.append(NarrowResult(value, subst, st.steps))
            if len(out.results) >= self.limits.max_answers:
                if queue:
                    out.status = Status.ANSWER_LIMIT
                break
        else:
            if cut_off:
                out.status = Status.STEP_LIMIT
        out.total_steps = self.total_steps
        return out


_STACK_SIZE = 512 * 1024 * 1024
_RECURSION = 200_000


def _in_big_stack(fn: Callable[[], NarrowOutcome]) -> NarrowOutcome:
    box: dict[str, object] = {}

    def target() -> None:
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, _RECURSION))
        try:
            box["value"] = fn()
        except BaseException as exc:  # re-raised in the caller's thread
            box["error"] = exc
        finally:
            sys.setrecursionlimit(old)

    previous = threading.stack_size()
    threading.stack_size(_STACK_SIZE)
    try:
        worker = threading.Thread(target=target, name="pl2flc-narrow")
        worker.start()
    finally:
        threading.stack_size(previous)
    worker.join()
    if "error" in box:
        raise box["error"]  # type: ignore[misc]
    return box["value"]  # type: ignore[return-value]


def narrow(program: FlcProgram, query: Expr, limits: Limits | None = None) -> NarrowOutcome:
    """Enumerate the values of ``query`` together with bindings of its free
    variables. ``program`` must use target names (see ``mangle_program``)."""
    limits = limits or Limits()
    fns = prepare(program)
    return _in_big_stack(lambda: _Driver(fns, limits).run(query))


def count_steps(program: FlcProgram, query: Expr, limits: Limits | None = None) -> int:
    """Steps of the derivation of the first value, or total steps if none."""
    out = narrow(program, query, Limits(max_answers=1) if limits is None else limits)
    return out.results[0].steps if out.results else out.total_steps
