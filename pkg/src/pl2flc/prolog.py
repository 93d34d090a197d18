"""Reader for the supported Prolog subset.

Standard operator syntax with a fixed operator table, list notation,
``%`` and ``/* */`` comments, and ``:- function p/n[: Spec].`` directives.
Anonymous variables become distinct fresh variables. Cut, negation,
all-solutions and database predicates are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .terms import (
    NIL,
    Clause,
    Comp,
    Directive,
    FreshNames,
    Goal,
    IfThenElse,
    Literal,
    LogicProgram,
    Num,
    Term,
    Var,
    format_term,
    is_fresh_name,
    cons,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, span: SourceSpan, message: str) -> None:
        super().__init__(f"{span}: {message}")
        self.span = span
        self.message = message or "syntax error"


# priority, type
PREFIX_OPS = {
    ":-": (1200, "fx"),
    "?-": (1200, "fx"),
    "function": (1150, "fx"),
    "\\+": (900, "fy"),
    "-": (200, "fy"),
    "+": (200, "fy"),
}
INFIX_OPS = {
    ":-": (1200, "xfx"),
    "-->": (1200, "xfx"),
    ";": (1100, "xfy"),
    "|": (1100, "xfy"),
    "->": (1050, "xfy"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"),
    "\\=": (700, "xfx"),
    "==": (700, "xfx"),
    "\\==": (700, "xfx"),
    "is": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "=..": (700, "xfx"),
    ":": (200, "xfy"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "//": (400, "yfx"),
    "mod": (400, "yfx"),
    "rem": (400, "yfx"),
    "div": (400, "yfx"),
    "**": (200, "xfx"),
    "^": (200, "xfy"),
}

ARITH_COMPARISONS = {"<", ">", "=<", ">=", "=:=", "=\\="}
BUILTIN_PREDICATES = {("is", 2), ("=", 2)} | {(op, 2) for op in ARITH_COMPARISONS}
UNSUPPORTED = {
    ("!", 0): "cut",
    ("\\+", 1): "negation as failure",
    ("not", 1): "negation as failure",
    ("findall", 3): "findall",
    ("bagof", 3): "bagof",
    ("setof", 3): "setof",
    ("forall", 2): "forall",
    ("assert", 1): "assert",
    ("asserta", 1): "asserta",
    ("assertz", 1): "assertz",
    ("retract", 1): "retract",
    ("call", 1): "call",
}

_SYMBOL_CHARS = "+-*/\\^<>=~:.?@#&$"
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*|/\*.*?\*/)
  | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?)
  | (?P<num>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<qatom>'(?:[^'\\]|\\.|'')*')
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<punct>[()\[\]{},|])
  | (?P<solo>[!;])
  | (?P<sym>[+\-*/\\^<>=~:.?@#&$]+)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str  # num var atom punct end eof
    text: str
    pos: int
    layout_before: bool
    functional: bool = False  # atom immediately followed by "("


class _Lexer:
    def __init__(self, src: str, filename: str) -> None:
        self.src = src
        self.filename = filename

    def span(self, pos: int) -> SourceSpan:
        line = self.src.count("\n", 0, pos) + 1
        col = pos - (self.src.rfind("\n", 0, pos) + 1) + 1
        return SourceSpan(self.filename, line, col)

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        pos = 0
        layout = True
        src = self.src
        while pos < len(src):
            m = _TOKEN_RE.match(src, pos)
            if m is None:
                if src.startswith("/*", pos):
                    raise ParseError(self.span(pos), "unterminated block comment")
                raise ParseError(self.span(pos), f"unexpected character {src[pos]!r}")
            kind = m.lastgroup
            text = m.group()
            if kind == "ws":
                layout = True
                pos = m.end()
                continue
            if kind == "float":
                raise ParseError(self.span(pos), f"floating point numbers are not supported: {text}")
            if kind == "str":
                raise ParseError(self.span(pos), "string literals are not supported")
            if kind == "sym" and text == "." and (m.end() == len(src) or src[m.end()].isspace() or src[m.end()] == "%"):
                out.append(Token("end", text, pos, layout))
            elif kind == "qatom":
                body = text[1:-1].replace("''", "'")
                body = re.sub(r"\\(.)", r"\1", body)
                out.append(Token("atom", body, pos, layout))
            elif kind in ("sym", "solo"):
                out.append(Token("atom", text, pos, layout))
            else:
                out.append(Token(kind, text, pos, layout))
            layout = False
            pos = m.end()
        out.append(Token("eof", "", len(src), True))
        for a, b in zip(out, out[1:]):
            if a.kind == "atom" and b.text == "(" and b.kind == "punct" and not b.layout_before:
                a.functional = True
        return out


class _Parser:
    def __init__(self, src: str, filename: str, fresh: FreshNames) -> None:
        self.lexer = _Lexer(src, filename)
        self.toks = self.lexer.tokens()
        self.i = 0
        self.fresh = fresh

    # -- helpers -------------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(self.lexer.span(tok.pos), msg)

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind not in ("punct", "atom"):
            got = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {got!r}")
        self.i += 1

    def _starts_term(self, tok: Token) -> bool:
        if tok.kind in ("num", "var"):
            return True
        if tok.kind == "punct":
            return tok.text in ("(", "[", "{")
        if tok.kind == "atom":
            return tok.text not in INFIX_OPS or tok.text in PREFIX_OPS or tok.functional
        return False

    # -- terms ---------------------------------------------------------------
    def parse(self, max_prec: int) -> tuple[Term, int]:
        left, left_prec = self.parse_primary(max_prec)
        return self.parse_infix(left, left_prec, max_prec)

    def parse_infix(self, left: Term, left_prec: int, max_prec: int) -> tuple[Term, int]:
        while True:
            tok = self.tok
            name = tok.text
            if tok.kind == "punct" and name in (",", "|"):
                pass
            elif tok.kind != "atom":
                break
            if name not in INFIX_OPS:
                break
            prec, typ = INFIX_OPS[name]
            if prec > max_prec:
                break
            left_max = prec if typ[0] == "y" else prec - 1
            right_max = prec if typ[2] == "y" else prec - 1
            if left_prec > left_max:
                break
            self.i += 1
            right, _ = self.parse(right_max)
            if name == "|":
                name = ";"
            left, left_prec = Comp(name, (left, right)), prec
        return left, left_prec

    def parse_primary(self, max_prec: int) -> tuple[Term, int]:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(int(tok.text)), 0
        if tok.kind == "var":
            self.i += 1
            return self.variable(tok), 0
        if tok.kind == "punct":
            if tok.text == "(":
                self.i += 1
                t, _ = self.parse(1200)
                self.expect(")")
                return t, 0
            if tok.text == "[":
                self.i += 1
                return self.parse_list(), 0
            if tok.text == "{":
                raise self.error("curly-brace terms are not supported")
            raise self.error(f"unexpected {tok.text!r}")
        if tok.kind == "atom":
            name = tok.text
            self.i += 1
            if tok.functional:
                self.i += 1  # "("
                args = [self.parse(999)[0]]
                while self.tok.text == "," and self.tok.kind == "punct":
                    self.i += 1
                    args.append(self.parse(999)[0])
                self.expect(")")
                return Comp(name, tuple(args)), 0
            if name == "-" and self.tok.kind == "num" and not self.tok.layout_before:
                num = self.tok
                self.i += 1
                return Num(-int(num.text)), 0
            if name in PREFIX_OPS and self._starts_term(self.tok) and not self._is_infix_here():
                prec, typ = PREFIX_OPS[name]
                if prec > max_prec:
                    prec = 999
                arg_max = prec if typ == "fy" else prec - 1
                arg, _ = self.parse(arg_max)
                return Comp(name, (arg,)), prec
            prec = 0
            if name in INFIX_OPS or name in PREFIX_OPS:
                prec = max(INFIX_OPS.get(name, (0,))[0], PREFIX_OPS.get(name, (0,))[0])
                if prec > max_prec:
                    prec = 0
            return Comp(name, ()), prec
        if tok.kind == "end":
            raise self.error("unexpected end of clause")
        raise self.error("unexpected end of input")

    def _is_infix_here(self) -> bool:
        # "- (" is a prefix application; "f(- , a)" style atoms are operands
        tok = self.tok
        return tok.kind == "atom" and tok.text in INFIX_OPS and not tok.functional and tok.text not in PREFIX_OPS

    def parse_list(self) -> Term:
        if self.tok.text == "]":
            self.i += 1
            return NIL
        items = [self.parse(999)[0]]
        while self.tok.text == "," and self.tok.kind == "punct":
            self.i += 1
            items.append(self.parse(999)[0])
        tail: Term = NIL
        if self.tok.text == "|":
            self.i += 1
            tail = self.parse(999)[0]
        self.expect("]")
        for item in reversed(items):
            tail = cons(item, tail)
        return tail

    def variable(self, tok: Token) -> Var:
        name = tok.text
        if name == "_":
            return Var(self.fresh())
        if is_fresh_name(name):
            raise self.error(f"variable names starting with '__' are reserved: {name}", tok)
        return Var(name)

    def clause_term(self) -> tuple[Term, Token]:
        start = self.tok
        t, _ = self.parse(1200)
        if self.tok.kind != "end":
            got = self.tok.text or "end of input"
            raise self.error(f"operator expected, found {got!r}")
        self.i += 1
        return t, start


# ---------------------------------------------------------------------------
# conversion from terms to clauses


def _literal(t: Term, where: Token, p: _Parser) -> Literal:
    if isinstance(t, Var):
        raise p.error("variables as goals (meta-calls) are not supported", where)
    if isinstance(t, Num):
        raise p.error(f"number {t.value} is not a callable goal", where)
    key = (t.functor, len(t.args))
    if key in UNSUPPORTED:
        raise p.error(f"unsupported feature: {UNSUPPORTED[key]} ({format_term(t)})", where)
    if t.functor in ("=..", "\\=", "==", "\\==", "-->", ":-", "?-") and len(t.args) == 2:
        raise p.error(f"unsupported builtin {t.functor}/2", where)
    if key == ("function", 1):
        raise p.error("function directives must appear as ':- function ...'", where)
    return Literal(t.functor, t.args)


def _goal(t: Term, where: Token, p: _Parser) -> Goal:
    items: list = []
    _flatten(t, items, where, p)
    return Goal(tuple(items))


def _flatten(t: Term, out: list, where: Token, p: _Parser) -> None:
    if isinstance(t, Comp) and t.functor == "," and len(t.args) == 2:
        _flatten(t.args[0], out, where, p)
        _flatten(t.args[1], out, where, p)
        return
    if isinstance(t, Comp) and t.functor == "true" and not t.args:
        return
    if isinstance(t, Comp) and t.functor == ";" and len(t.args) == 2:
        left, right = t.args
        if isinstance(left, Comp) and left.functor == "->" and len(left.args) == 2:
            out.append(
                IfThenElse(_goal(left.args[0], where, p), _goal(left.args[1], where, p), _goal(right, where, p))
            )
            return
        raise p.error("disjunction without '->' is not supported", where)
    if isinstance(t, Comp) and t.functor == "->" and len(t.args) == 2:
        raise p.error("if-then without an else branch is not supported", where)
    out.append(_literal(t, where, p))


def _int_spec(t: Term) -> int | None:
    return t.value if isinstance(t, Num) else None


def _directive(t: Term, where: Token, p: _Parser) -> Directive:
    if not (isinstance(t, Comp) and t.functor == "function" and len(t.args) == 1):
        raise p.error(f"unsupported directive: {format_term(t)}", where)
    spec = t.args[0]
    positions: Term | None = None
    if isinstance(spec, Comp) and spec.functor == ":" and len(spec.args) == 2:
        spec, positions = spec.args
    elif (
        isinstance(spec, Comp)
        and spec.functor == "/"
        and len(spec.args) == 2
        and isinstance(spec.args[1], Comp)
        and spec.args[1].functor == ":"
        and len(spec.args[1].args) == 2
    ):
        # "p/3: 3" reads as p/(3:3) under the standard priorities
        arity_term, positions = spec.args[1].args
        spec = Comp("/", (spec.args[0], arity_term))
    if not (
        isinstance(spec, Comp)
        and spec.functor == "/"
        and len(spec.args) == 2
        and isinstance(spec.args[0], Comp)
        and not spec.args[0].args
        and isinstance(spec.args[1], Num)
    ):
        raise p.error("function directive expects name/arity", where)
    name = spec.args[0].functor
    arity = spec.args[1].value
    if positions is None:
        if arity < 1:
            raise p.error("function directive for a 0-ary predicate needs explicit positions", where)
        respos = {arity}
    elif isinstance(positions, Num):
        respos = {positions.value}
    else:
        respos = set()
        cur = positions
        while isinstance(cur, Comp) and cur.functor == "." and len(cur.args) == 2:
            k = _int_spec(cur.args[0])
            if k is None:
                raise p.error("result positions must be integers", where)
            respos.add(k)
            cur = cur.args[1]
        if cur != NIL:
            raise p.error("malformed result position list", where)
    bad = sorted(k for k in respos if not 1 <= k <= arity)
    if bad:
        raise p.error(f"result position {bad[0]} outside 1..{arity} for {name}/{arity}", where)
    return Directive(name, arity, frozenset(respos))


def _clause(t: Term, where: Token, p: _Parser) -> Clause:
    if isinstance(t, Comp) and t.functor == ":-" and len(t.args) == 2:
        head, body = t.args
        goal = _goal(body, where, p)
    else:
        head, goal = t, Goal()
    if isinstance(head, Var) or isinstance(head, Num):
        raise p.error("clause head must be an atom or compound term", where)
    key = (head.functor, len(head.args))
    if key in BUILTIN_PREDICATES or head.functor in (",", ";", "->"):
        raise p.error(f"cannot redefine builtin {head.functor}/{len(head.args)}", where)
    return Clause(Literal(head.functor, head.args), goal)


def parse_program(src: str, filename: str = "<string>") -> LogicProgram:
    p = _Parser(src, filename, FreshNames("A"))
    clauses: list[Clause] = []
    directives: list[Directive] = []
    while p.tok.kind != "eof":
        t, start = p.clause_term()
        if isinstance(t, Comp) and t.functor == ":-" and len(t.args) == 1:
            directives.append(_directive(t.args[0], start, p))
        else:
            clauses.append(_clause(t, start, p))
    return LogicProgram(tuple(clauses), tuple(directives))


def parse_directive(src: str, filename: str = "<string>") -> Directive:
    prog = parse_program(src, filename)
    if len(prog.directives) != 1 or prog.clauses:
        raise ParseError(SourceSpan(filename, 1, 1), "expected exactly one directive")
    return prog.directives[0]


def parse_goal(src: str, filename: str = "<goal>", fresh: FreshNames | None = None) -> Goal:
    text = src.strip()
    if text.startswith("?-"):
        text = text[2:]
    if not text.rstrip().endswith("."):
        text = text + " ."
    p = _Parser(text, filename, fresh or FreshNames("Q"))
    t, start = p.clause_term()
    if p.tok.kind != "eof":
        raise p.error("expected a single goal")
    return _goal(t, start, p)


def parse_term(src: str) -> Term:
    p = _Parser(src.strip() + " .", "<term>", FreshNames("T"))
    t, _ = p.clause_term()
    return t


# ---------------------------------------------------------------------------
# unparsing (round-trip utility)


def _unparse_var(name: str, counts: dict[str, int]) -> str:
    if is_fresh_name(name):
        return "_" if counts.get(name, 0) <= 1 else "_" + name[2:]
    return name


def _unparse_term(t: Term, counts: dict[str, int]) -> str:
    if isinstance(t, Var):
        return _unparse_var(t.name, counts)
    if isinstance(t, Num):
        return str(t.value) if t.value >= 0 else f"({t.value})"
    if t.functor == "." and len(t.args) == 2:
        items = []
        cur: Term = t
        while isinstance(cur, Comp) and cur.functor == "." and len(cur.args) == 2:
            items.append(_unparse_term(cur.args[0], counts))
            cur = cur.args[1]
        tail = "" if cur == NIL else "|" + _unparse_term(cur, counts)
        return "[" + ",".join(items) + tail + "]"
    name = format_term(Comp(t.functor))
    if not t.args:
        if t.functor in INFIX_OPS or t.functor in PREFIX_OPS:
            return f"({name})"
        return name
    return name + "(" + ",".join(_unparse_term(a, counts) for a in t.args) + ")"


def _unparse_goal(g: Goal, counts: dict[str, int]) -> str:
    if not g.literals:
        return "true"
    parts = []
    for item in g.literals:
        if isinstance(item, Literal):
            parts.append(_unparse_term(item.as_term(), counts))
        else:
            parts.append(
                f"({_unparse_goal(item.cond, counts)} -> {_unparse_goal(item.then, counts)}"
                f" ; {_unparse_goal(item.else_, counts)})"
            )
    return ", ".join(parts)


def _count_vars(c: Clause) -> dict[str, int]:
    counts: dict[str, int] = {}

    def term(t: Term) -> None:
        if isinstance(t, Var):
            counts[t.name] = counts.get(t.name, 0) + 1
        elif isinstance(t, Comp):
            for a in t.args:
                term(a)

    def goal(g: Goal) -> None:
        for item in g.literals:
            if isinstance(item, Literal):
                for a in item.args:
                    term(a)
            else:
                goal(item.cond)
                goal(item.then)
                goal(item.else_)

    for a in c.head.args:
        term(a)
    goal(c.body)
    return counts


def unparse_program(prog: LogicProgram) -> str:
    lines = []
    for d in prog.directives:
        pos = ",".join(str(k) for k in sorted(d.respos))
        lines.append(f":- function {format_term(Comp(d.pred))}/{d.arity}: [{pos}].")
    for c in prog.clauses:
        counts = _count_vars(c)
        head = _unparse_term(c.head.as_term(), counts)
        if c.is_fact:
            lines.append(f"{head}.")
        else:
            lines.append(f"{head} :- {_unparse_goal(c.body, counts)}.")
    return "\n".join(lines) + ("\n" if lines else "")
