"""Rendering of functional logic programs as Curry source text.

Rendering happens in two steps. :func:`mangle_program` rewrites every
identifier into a legal, collision-free target name, and :func:`render_program`
prints the mangled tree. The mangled tree is also what the narrowing engine
executes, so printed text and executed program agree.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .flc import (
    DataDecl,
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
    rule_exprs,
    walk_exprs,
)

PROLOGUE = "-- Generated by pl2flc"

KEYWORDS = frozenset(
    "case data do else external fcase free if import in infix infixl infixr let module "
    "of then type where class instance deriving newtype hiding qualified as".split()
)
RESERVED_FUNCTIONS = frozenset({"quot", "mod", "div", "not", "otherwise", "success"})
RESERVED_CONSTRUCTORS = frozenset({"True", "False", "Unit", "Term"})
ANON = "_"

_IDENT_RE = re.compile(r"[^A-Za-z0-9_']")


def _sanitize(name: str) -> str:
    return _IDENT_RE.sub(lambda m: f"_{ord(m.group()):x}", name)


def _lower_first(s: str) -> str:
    return s[:1].lower() + s[1:]


def _upper_first(s: str) -> str:
    return s[:1].upper() + s[1:]


def split_fname(fname: str) -> tuple[str, int]:
    """``"app/3"`` -> ``("app", 3)``; plain names have arity -1."""
    base, sep, arity = fname.rpartition("/")
    if sep and arity.isdigit() and base:
        return base, int(arity)
    return fname, -1


def _function_base(name: str) -> str:
    clean = _sanitize(name)
    if clean != name or not clean[:1].isalpha():
        clean = "f" + _upper_first(clean.lstrip("_")) if clean.lstrip("_") else "f"
    return _lower_first(clean)


def _constructor_base(name: str) -> str:
    clean = _sanitize(name)
    if clean != name or not clean[:1].isalpha():
        return "C" + clean.lstrip("_")
    return _upper_first(clean)


def _unique(base: str, arity: int, taken: set[str]) -> str:
    if base not in taken:
        return base
    n = 1
    while f"{base}_k{arity}_{n}" in taken:
        n += 1
    return f"{base}_k{arity}_{n}"


@dataclass
class ManglingTable:
    functions: dict[str, str] = field(default_factory=dict)
    constructors: dict[tuple[str, int], str] = field(default_factory=dict)

    def function(self, fname: str) -> str:
        if fname not in self.functions:
            base, arity = split_fname(fname)
            taken = set(self.functions.values()) | KEYWORDS | RESERVED_FUNCTIONS
            self.functions[fname] = _unique(_function_base(base), max(arity, 0), taken)
        return self.functions[fname]

    def constructor(self, name: str, arity: int) -> str:
        if (name, arity) in (("[]", 0), (".", 2)):
            return name
        key = (name, arity)
        if key not in self.constructors:
            taken = set(self.constructors.values()) | RESERVED_CONSTRUCTORS
            self.constructors[key] = _unique(_constructor_base(name), arity, taken)
        return self.constructors[key]

    def variables(self, names: list[str], counts: Counter, fresh: set[str] | None = None) -> dict[str, str]:
        """Target names for one scope (a rule or a query).

        ``counts`` gives total occurrences; generated names (``__``) that occur
        once become ``_``, the others ``u1``, ``u2``, ...
        """
        taken = set(self.functions.values()) | KEYWORDS | RESERVED_FUNCTIONS
        out: dict[str, str] = {}
        used: set[str] = set()
        anon = 0
        for name in names:
            if name in out:
                continue
            generated = name.startswith("__") or name == ANON
            if generated and counts[name] <= 1:
                out[name] = ANON
                continue
            if generated:
                anon += 1
                while f"u{anon}" in used or f"u{anon}" in taken or f"u{anon}" in names:
                    anon += 1
                target = f"u{anon}"
            else:
                base = _sanitize(name.lstrip("_")) or "v"
                base = _lower_first(base)
                if not base[:1].isalpha():
                    base = "v" + base
                target = _unique(base, 0, used | taken)
            out[name] = target
            used.add(target)
        return out


# ---------------------------------------------------------------------------
# mangling


def _pattern_names(p: Pattern, acc: list[str]) -> None:
    if isinstance(p, PVar):
        acc.append(p.name)
    elif isinstance(p, (PCons,)):
        for a in p.args:
            _pattern_names(a, acc)
    elif isinstance(p, PTuple):
        for a in p.patterns:
            _pattern_names(a, acc)


def _expr_names(e: Expr, acc: list[str]) -> None:
    for x in walk_exprs(e):
        if isinstance(x, EVar):
            acc.append(x.name)
        elif isinstance(x, ELet):
            for p, _ in x.bindings:
                _pattern_names(p, acc)


def rule_variable_names(r: Rule) -> list[str]:
    """All variable occurrences of a rule, in textual order."""
    acc: list[str] = []
    for p in r.params:
        _pattern_names(p, acc)
    if r.guard is not None:
        _expr_names(r.guard, acc)
    _expr_names(r.rhs, acc)
    for p, e in r.where:
        _pattern_names(p, acc)
        _expr_names(e, acc)
    return acc


def mangle_pattern(p: Pattern, table: ManglingTable, env: dict[str, str]) -> Pattern:
    if isinstance(p, PVar):
        return PVar(env.get(p.name, p.name))
    if isinstance(p, PNum):
        return p
    if isinstance(p, PCons):
        return PCons(table.constructor(p.name, len(p.args)), tuple(mangle_pattern(a, table, env) for a in p.args))
    return PTuple(tuple(mangle_pattern(a, table, env) for a in p.patterns))


def mangle_expr(e: Expr, table: ManglingTable, env: dict[str, str]) -> Expr:
    def m(x: Expr) -> Expr:
        return mangle_expr(x, table, env)

    if isinstance(e, EVar):
        return EVar(env.get(e.name, e.name))
    if isinstance(e, (ENum, ETrue, EFalse)):
        return e
    if isinstance(e, ECons):
        return ECons(table.constructor(e.name, len(e.args)), tuple(m(a) for a in e.args))
    if isinstance(e, EApply):
        return EApply(table.function(e.fname), tuple(m(a) for a in e.args))
    if isinstance(e, ETuple):
        return ETuple(tuple(m(a) for a in e.exprs))
    if isinstance(e, EUnify):
        return EUnify(m(e.lhs), m(e.rhs))
    if isinstance(e, EConj):
        return EConj(m(e.lhs), m(e.rhs))
    if isinstance(e, EGuard):
        return EGuard(m(e.cond), m(e.body))
    if isinstance(e, EIf):
        return EIf(m(e.cond), m(e.then), m(e.else_))
    if isinstance(e, EArith):
        return EArith(e.op, m(e.lhs), m(e.rhs))
    if isinstance(e, ECmp):
        return ECmp(e.op, m(e.lhs), m(e.rhs))
    if isinstance(e, ELet):
        return ELet(tuple((mangle_pattern(p, table, env), m(r)) for p, r in e.bindings), m(e.body))
    raise TypeError(f"not an expression: {e!r}")


def _register_names(program: FlcProgram, table: ManglingTable) -> None:
    # functions first so that variable names can avoid them
    for fname in program.functions():
        table.function(fname)
    for name, arity in program.datadecl.constructors:
        table.constructor(name, arity)
    for r in program.rules:
        for e in rule_exprs(r):
            for x in walk_exprs(e):
                if isinstance(x, EApply):
                    table.function(x.fname)
                elif isinstance(x, ECons):
                    table.constructor(x.name, len(x.args))


def mangle_rule(r: Rule, table: ManglingTable) -> Rule:
    names = rule_variable_names(r)
    env = table.variables(names, Counter(names))
    return Rule(
        table.function(r.fname),
        tuple(mangle_pattern(p, table, env) for p in r.params),
        None if r.guard is None else mangle_expr(r.guard, table, env),
        mangle_expr(r.rhs, table, env),
        tuple((mangle_pattern(p, table, env), mangle_expr(e, table, env)) for p, e in r.where),
    )


def mangle_program(program: FlcProgram, table: ManglingTable | None = None) -> tuple[FlcProgram, ManglingTable]:
    table = table or ManglingTable()
    _register_names(program, table)
    rules = tuple(mangle_rule(r, table) for r in program.rules)
    data = DataDecl(
        program.datadecl.typename,
        tuple((table.constructor(n, a), a) for n, a in program.datadecl.constructors),
    )
    return FlcProgram(data, rules), table


def mangle_query(e: Expr, table: ManglingTable) -> tuple[Expr, dict[str, str]]:
    """Mangle a goal expression; every variable keeps a visible name."""
    names: list[str] = []
    _expr_names(e, names)
    counts = Counter({n: 2 for n in names})  # never collapse query variables to _
    env = table.variables(names, counts)
    return mangle_expr(e, table, env), env


# ---------------------------------------------------------------------------
# rendering

_INFIX = {
    # op: (precedence, left operand prec, right operand prec)
    "&>": (0, 1, 0),
    "&&": (3, 4, 3),
    "=:=": (4, 5, 5),
    "==": (4, 5, 5),
    "/=": (4, 5, 5),
    "<": (4, 5, 5),
    "<=": (4, 5, 5),
    ">": (4, 5, 5),
    ">=": (4, 5, 5),
    ":": (5, 6, 5),
    "+": (6, 6, 7),
    "-": (6, 6, 7),
    "*": (7, 7, 8),
    "quot": (7, 7, 8),
    "mod": (7, 7, 8),
    "div": (7, 7, 8),
}
APP_PREC = 10
ARG_PREC = 11


def _paren(text: str, prec: int, ctx: int) -> str:
    return f"({text})" if prec < ctx else text


def _list_items(e: Expr) -> tuple[list[Expr], Expr]:
    items: list[Expr] = []
    while isinstance(e, ECons) and e.name == "." and len(e.args) == 2:
        items.append(e.args[0])
        e = e.args[1]
    return items, e


def _is_nil(e: Expr) -> bool:
    return isinstance(e, ECons) and e.name == "[]" and not e.args


def _simple(e: Expr) -> bool:
    if isinstance(e, (EVar, ETrue, EFalse, ETuple)):
        return True
    if isinstance(e, ENum):
        return e.value >= 0
    if isinstance(e, ECons):
        if not e.args:
            return True
        items, tail = _list_items(e)
        if items and _is_nil(tail):
            return True
        if items:
            return all(_simple(x) for x in items) and _simple(tail)
    return False


def render_expr(e: Expr, ctx: int = 0) -> str:
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, ENum):
        return f"({e.value})" if e.value < 0 and ctx > 0 else str(e.value)
    if isinstance(e, ETrue):
        return "True"
    if isinstance(e, EFalse):
        return "False"
    if isinstance(e, ETuple):
        return "(" + ", ".join(render_expr(x) for x in e.exprs) + ")"
    if isinstance(e, ECons):
        items, tail = _list_items(e)
        if items:
            if _is_nil(tail):
                return "[" + ", ".join(render_expr(x) for x in items) + "]"
            return _render_cons(items, tail, ctx)
        if not e.args:
            return e.name
        return _paren(" ".join([e.name] + [render_expr(a, ARG_PREC) for a in e.args]), APP_PREC, ctx)
    if isinstance(e, EApply):
        if not e.args:
            return e.fname
        return _paren(" ".join([e.fname] + [render_expr(a, ARG_PREC) for a in e.args]), APP_PREC, ctx)
    if isinstance(e, (EUnify, EConj, EGuard, EArith, ECmp)):
        op = {EUnify: "=:=", EConj: "&&", EGuard: "&>"}.get(type(e)) or e.op  # type: ignore[union-attr]
        lhs, rhs = (e.cond, e.body) if isinstance(e, EGuard) else (e.lhs, e.rhs)  # type: ignore[union-attr]
        prec, lp, rp = _INFIX[op]
        sym = f"`{op}`" if op.isalpha() else op
        return _paren(f"{render_expr(lhs, lp)} {sym} {render_expr(rhs, rp)}", prec, ctx)
    if isinstance(e, EIf):
        text = f"if {render_expr(e.cond)} then {render_expr(e.then)} else {render_expr(e.else_)}"
        return _paren(text, 0, max(ctx, 0) and 1)
    if isinstance(e, ELet):
        binds = [f"{render_pattern(p)} = {render_expr(r)}" for p, r in e.bindings]
        head = binds[0] if len(binds) == 1 else "{ " + "; ".join(binds) + " }"
        return _paren(f"let {head} in {render_expr(e.body)}", 0, max(ctx, 0) and 1)
    raise TypeError(f"not an expression: {e!r}")


def _render_cons(items: list[Expr], tail: Expr, ctx: int) -> str:
    parts = items + [tail]
    spaced = not all(_simple(x) for x in parts)
    rendered = [render_expr(x, 6) for x in items] + [render_expr(tail, 5)]
    return _paren((" : " if spaced else ":").join(rendered), 5, ctx)


def render_pattern(p: Pattern, ctx: int = 0) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PNum):
        return f"({p.value})" if p.value < 0 and ctx > 0 else str(p.value)
    if isinstance(p, PTuple):
        return "(" + ", ".join(render_pattern(x) for x in p.patterns) + ")"
    if p.name == "." and len(p.args) == 2:
        items: list[Pattern] = []
        cur: Pattern = p
        while isinstance(cur, PCons) and cur.name == "." and len(cur.args) == 2:
            items.append(cur.args[0])
            cur = cur.args[1]
        if isinstance(cur, PCons) and cur.name == "[]" and not cur.args:
            return "[" + ", ".join(render_pattern(x) for x in items) + "]"
        text = ":".join([render_pattern(x, 6) for x in items] + [render_pattern(cur, 5)])
        return _paren(text, 5, ctx)
    if not p.args:
        return p.name
    return _paren(" ".join([p.name] + [render_pattern(a, ARG_PREC) for a in p.args]), APP_PREC, ctx)


WHERE_INDENT = "    where "
WHERE_CONT = " " * len(WHERE_INDENT)


def render_rule(r: Rule) -> str:
    lhs = " ".join([r.fname] + [render_pattern(p, ARG_PREC) for p in r.params])
    guard = "" if r.guard is None else f" | {render_expr(r.guard)}"
    text = f"{lhs}{guard} = {render_expr(r.rhs)}"
    for i, (p, e) in enumerate(r.where):
        prefix = WHERE_INDENT if i == 0 else WHERE_CONT
        text += f"\n{prefix}{render_pattern(p)} = {render_expr(e)}"
    return text


def render_data(d: DataDecl) -> str:
    if not d.constructors:
        return f"data {d.typename} = Unit"
    alts = [" ".join([name] + [d.typename] * arity) for name, arity in d.constructors]
    return f"data {d.typename} = " + " | ".join(alts)


def render_program(program: FlcProgram) -> str:
    """Render an already mangled program."""
    groups = ["\n".join(render_rule(r) for r in program.rules_for(f)) for f in program.functions()]
    return "\n\n".join([PROLOGUE + "\n" + render_data(program.datadecl)] + groups) + "\n"


def emit_program(program: FlcProgram) -> str:
    return render_program(mangle_program(program)[0])


def emit_data_decl(program: FlcProgram) -> str:
    return render_data(mangle_program(program)[0].datadecl)


def render_value(e: Expr) -> str:
    return render_expr(e)
