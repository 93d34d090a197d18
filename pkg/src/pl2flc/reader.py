"""Reader for the emitted Curry subset and for narrowing queries.

Identifiers follow the target conventions: an uppercase identifier is a
constructor, a lowercase identifier naming a defined function is an
application, and any other lowercase identifier is a free variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .flc import (
    FALSE,
    TRUE,
    DataDecl,
    EApply,
    EArith,
    ECmp,
    ECons,
    EConj,
    EGuard,
    EIf,
    ELet,
    ENum,
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
)


class ReadError(Exception):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<tick>`[a-z]+`)
  | (?P<op>=:=|==|/=|<=|>=|&&|&>|[<>:+\-*=|(),\[\];{}])
    """,
    re.VERBOSE,
)

KEYWORDS = {"if", "then", "else", "let", "in", "where", "data"}

# op -> (precedence, associativity)
_BINARY = {
    "&>": (0, "right"),
    "&&": (3, "right"),
    "=:=": (4, "none"),
    "==": (4, "none"),
    "/=": (4, "none"),
    "<": (4, "none"),
    "<=": (4, "none"),
    ">": (4, "none"),
    ">=": (4, "none"),
    ":": (5, "right"),
    "+": (6, "left"),
    "-": (6, "left"),
    "*": (7, "left"),
    "quot": (7, "left"),
    "mod": (7, "left"),
    "div": (7, "left"),
}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    out = []
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise ReadError(f"unexpected character {src[i]!r} at offset {i}")
        kind = m.lastgroup or ""
        if kind == "tick":
            out.append(_Tok("op", m.group()[1:-1], i))
        elif kind == "ident" and m.group() in KEYWORDS:
            out.append(_Tok("kw", m.group(), i))
        elif kind != "ws":
            out.append(_Tok(kind, m.group(), i))
        i = m.end()
    out.append(_Tok("eof", "", len(src)))
    return out


def _binary(op: str, lhs: Expr, rhs: Expr) -> Expr:
    if op == "&>":
        return EGuard(lhs, rhs)
    if op == "&&":
        return EConj(lhs, rhs)
    if op == "=:=":
        return EUnify(lhs, rhs)
    if op == ":":
        return ECons(".", (lhs, rhs))
    if op in ("==", "/=", "<", "<=", ">", ">="):
        return ECmp(op, lhs, rhs)
    return EArith(op, lhs, rhs)


class _Reader:
    def __init__(self, src: str, functions: set[str]) -> None:
        self.toks = _tokenize(src)
        self.i = 0
        self.functions = functions

    # -- token helpers --------------------------------------------------------
    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind in ("op", "kw")

    def expect(self, text: str) -> None:
        t = self.next()
        if t.text != text:
            raise ReadError(f"expected {text!r} but found {t.text or 'end of input'!r} at offset {t.pos}")

    def done(self) -> None:
        if self.peek().kind != "eof":
            t = self.peek()
            raise ReadError(f"unexpected {t.text!r} at offset {t.pos}")

    # -- expressions ----------------------------------------------------------
    def expr(self, min_prec: int = 0) -> Expr:
        if self.at("if"):
            self.next()
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            return EIf(c, a, self.expr())
        if self.at("let"):
            self.next()
            bindings = []
            if self.at("{"):
                self.next()
                bindings.append(self.binding())
                while self.at(";"):
                    self.next()
                    bindings.append(self.binding())
                self.expect("}")
            else:
                bindings.append(self.binding())
            self.expect("in")
            return ELet(tuple(bindings), self.expr())
        lhs = self.application()
        while True:
            t = self.peek()
            if t.kind != "op" or t.text not in _BINARY:
                return lhs
            prec, assoc = _BINARY[t.text]
            if prec < min_prec:
                return lhs
            self.next()
            rhs = self.expr(prec if assoc == "right" else prec + 1)
            lhs = _binary(t.text, lhs, rhs)
            if assoc == "none" and self.peek().text in _BINARY and _BINARY[self.peek().text][0] == prec:
                raise ReadError(f"non-associative operator {t.text!r} chained at offset {t.pos}")

    def _starts_atom(self) -> bool:
        t = self.peek()
        return t.kind in ("int", "ident") or (t.kind == "op" and t.text in ("(", "["))

    def application(self) -> Expr:
        t = self.peek()
        if t.kind == "ident" and (t.text[0].isupper() or t.text in self.functions):
            self.next()
            args = []
            while self._starts_atom():
                args.append(self.atom())
            if t.text == "True" and not args:
                return TRUE
            if t.text == "False" and not args:
                return FALSE
            if t.text[0].isupper():
                return ECons(t.text, tuple(args))
            return EApply(t.text, tuple(args))
        head = self.atom()
        if self._starts_atom():
            raise ReadError(f"cannot apply a non-function at offset {t.pos}")
        return head

    def atom(self) -> Expr:
        t = self.next()
        if t.text == "-" and t.kind == "op" and self.peek().kind == "int":
            return ENum(-int(self.next().text))
        if t.kind == "int":
            return ENum(int(t.text))
        if t.kind == "ident":
            if t.text == "True":
                return TRUE
            if t.text == "False":
                return FALSE
            if t.text[0].isupper():
                return ECons(t.text)
            if t.text in self.functions:
                return EApply(t.text)
            return EVar(t.text)
        if t.text == "(":
            items = [self.expr()]
            while self.at(","):
                self.next()
                items.append(self.expr())
            self.expect(")")
            return items[0] if len(items) == 1 else ETuple(tuple(items))
        if t.text == "[":
            items = []
            if not self.at("]"):
                items.append(self.expr())
                while self.at(","):
                    self.next()
                    items.append(self.expr())
            self.expect("]")
            result: Expr = ECons("[]")
            for x in reversed(items):
                result = ECons(".", (x, result))
            return result
        raise ReadError(f"unexpected {t.text or 'end of input'!r} at offset {t.pos}")

    # -- patterns -------------------------------------------------------------
    def pattern(self) -> Pattern:
        head = self.pattern_app()
        if self.at(":"):
            self.next()
            return PCons(".", (head, self.pattern()))
        return head

    def pattern_app(self) -> Pattern:
        t = self.peek()
        if t.kind == "ident" and t.text[0].isupper():
            self.next()
            args = []
            while self._starts_atom():
                args.append(self.pattern_atom())
            return PCons(t.text, tuple(args))
        return self.pattern_atom()

    def pattern_atom(self) -> Pattern:
        t = self.next()
        if t.text == "-" and t.kind == "op" and self.peek().kind == "int":
            return PNum(-int(self.next().text))
        if t.kind == "int":
            return PNum(int(t.text))
        if t.kind == "ident":
            return PCons(t.text) if t.text[0].isupper() else PVar(t.text)
        if t.text == "(":
            items = [self.pattern()]
            while self.at(","):
                self.next()
                items.append(self.pattern())
            self.expect(")")
            return items[0] if len(items) == 1 else PTuple(tuple(items))
        if t.text == "[":
            items = []
            if not self.at("]"):
                items.append(self.pattern())
                while self.at(","):
                    self.next()
                    items.append(self.pattern())
            self.expect("]")
            result: Pattern = PCons("[]")
            for x in reversed(items):
                result = PCons(".", (x, result))
            return result
        raise ReadError(f"unexpected {t.text or 'end of input'!r} in pattern at offset {t.pos}")

    def binding(self) -> tuple[Pattern, Expr]:
        p = self.pattern()
        self.expect("=")
        return p, self.expr()

    # -- rules ----------------------------------------------------------------
    def rule(self) -> Rule:
        t = self.next()
        if t.kind != "ident" or not t.text[0].islower():
            raise ReadError(f"expected a function name at offset {t.pos}")
        params = []
        while self._starts_atom():
            params.append(self.pattern_atom())
        guard = None
        if self.at("|"):
            self.next()
            guard = self.expr()
        self.expect("=")
        rhs = self.expr()
        where = []
        if self.at("where"):
            self.next()
            where.append(self.binding())
        self.done()
        return Rule(t.text, tuple(params), guard, rhs, tuple(where))

    def lone_binding(self) -> tuple[Pattern, Expr]:
        b = self.binding()
        self.done()
        return b


def _logical_lines(src: str) -> list[list[str]]:
    """Group source lines into rules; each ``where`` binding after the first
    stays a chunk of its own so that juxtaposition cannot run across it."""
    rules: list[list[str]] = []
    for raw in src.splitlines():
        line = "" if raw.lstrip().startswith("--") else raw.rstrip()
        if not line.strip():
            continue
        if line[0] not in " \t":
            rules.append([line])
            continue
        if not rules:
            raise ReadError("continuation line without a rule")
        chunk = line.strip()
        chunks = rules[-1]
        if chunk.startswith("where ") and len(chunks) == 1 and " where " not in chunks[0]:
            chunks[0] += " " + chunk
            chunks.append("")  # marks the start of further bindings
        elif len(chunks) > 1:
            chunks.append(chunk)
        else:
            chunks[0] += " " + chunk
    return [[c for c in chunks if c] for chunks in rules]


def _read_data(line: str) -> DataDecl:
    m = re.fullmatch(r"data\s+(\w+)\s*=\s*(.*)", line)
    if not m:
        raise ReadError(f"malformed data declaration: {line!r}")
    typename, body = m.groups()
    ctors = []
    for alt in body.split("|"):
        words = alt.split()
        if not words or any(w != typename for w in words[1:]):
            raise ReadError(f"malformed constructor {alt.strip()!r}")
        ctors.append((words[0], len(words) - 1))
    if ctors == [("Unit", 0)]:
        ctors = []
    return DataDecl(typename, tuple(ctors))


def read_program(src: str) -> FlcProgram:
    lines = _logical_lines(src)
    data = DataDecl()
    rule_lines = []
    for chunks in lines:
        if chunks[0].startswith("data "):
            data = _read_data(" ".join(chunks))
        else:
            rule_lines.append(chunks)
    functions = {chunks[0].split()[0] for chunks in rule_lines}
    rules = []
    for main, *extra in rule_lines:
        rule = _Reader(main, functions).rule()
        more = tuple(_Reader(c, functions).lone_binding() for c in extra)
        if more and not rule.where:
            raise ReadError(f"binding outside a where clause: {extra[0]!r}")
        rules.append(Rule(rule.fname, rule.params, rule.guard, rule.rhs, rule.where + more))
    return FlcProgram(data, tuple(rules))


def read_query(src: str, program: FlcProgram) -> Expr:
    r = _Reader(src, set(program.functions()))
    e = r.expr()
    r.done()
    return e
