"""Cross-engine comparison and the benchmark suite runner."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import ResPosMap, infer_respos
from .codegen import ManglingTable, mangle_program, mangle_query
from .flc import ECons, ENum, ETrue, EVar, Expr, FlcProgram
from .narrow import NarrowOutcome, narrow
from .sld import Limits, SearchOutcome, Status, goal_variables, solve
from .terms import Comp, Goal, LogicProgram, Num, Term, Var, canonical, format_term
from .transform import TransformMode, transform_goal, transform_program

EQUAL = "EQUAL"
SLD_LIMIT = "SLD-LIMIT"
NARROW_LIMIT = "NARROW-LIMIT"
MISMATCH = "MISMATCH"

AnswerKey = tuple[Term, ...]


def expr_to_term(e: Expr, table: ManglingTable) -> Term:
    """Read a narrowing value back into Prolog syntax."""
    reverse = {target: key for key, target in table.constructors.items()}
    return _to_term(e, reverse)


def _to_term(e: Expr, reverse: dict[str, tuple[str, int]]) -> Term:
    if isinstance(e, EVar):
        return Var(e.name)
    if isinstance(e, ENum):
        return Num(e.value)
    if isinstance(e, ECons):
        name = reverse.get(e.name, (e.name, len(e.args)))[0]
        return Comp(name, tuple(_to_term(a, reverse) for a in e.args))
    raise ValueError(f"not a constructor term: {e!r}")


@dataclass
class Translation:
    """A program and goal carried through one transformation mode."""

    mode: TransformMode
    program: FlcProgram  # mangled
    query: Expr  # mangled
    table: ManglingTable
    var_names: dict[str, str]  # goal variable -> target name


def translate(
    program: LogicProgram, goal: Goal, mode: TransformMode, infer: bool = True, respos: ResPosMap | None = None
) -> Translation:
    if respos is None:
        respos = infer_respos(program, infer)
    flc = transform_program(program, respos, mode)
    mangled, table = mangle_program(flc)
    query, env = mangle_query(transform_goal(goal, respos, mode), table)
    return Translation(mode, mangled, query, table, env)


def narrow_answers(tr: Translation, outcome: NarrowOutcome, names: list[str]) -> list[AnswerKey]:
    keys = []
    for r in outcome.results:
        if not isinstance(r.value, ETrue):
            continue
        values = []
        for n in sorted(names):
            target = tr.var_names.get(n)
            values.append(expr_to_term(r.subst[target], tr.table) if target in r.subst else Var(n))
        keys.append(canonical(values))
    return keys


@dataclass
class Comparison:
    verdict: str
    names: list[str]
    sld: SearchOutcome
    narrowing: NarrowOutcome
    sld_answers: set[AnswerKey] = field(default_factory=set)
    narrow_answers: set[AnswerKey] = field(default_factory=set)

    @property
    def ok(self) -> bool:
        return self.verdict != MISMATCH

    def render(self) -> str:
        def show(keys: set[AnswerKey]) -> list[str]:
            rows = []
            for key in sorted(keys, key=lambda k: tuple(format_term(t) for t in k)):
                rows.append("  {" + ", ".join(f"{n} -> {format_term(t)}" for n, t in zip(sorted(self.names), key)) + "}")
            return rows or ["  (none)"]

        lines = [f"sld: {len(self.sld_answers)} answers, status {self.sld.status.value}, steps {self.sld.total_steps}"]
        lines += show(self.sld_answers)
        lines.append(
            f"narrow: {len(self.narrow_answers)} answers, status {self.narrowing.status.value}, "
            f"steps {self.narrowing.total_steps}"
        )
        lines += show(self.narrow_answers)
        lines.append("only sld:")
        lines += show(self.sld_answers - self.narrow_answers)
        lines.append("only narrow:")
        lines += show(self.narrow_answers - self.sld_answers)
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"


def verdict(sld: SearchOutcome, nar: NarrowOutcome, a: set[AnswerKey], b: set[AnswerKey]) -> str:
    sld_done = sld.status is Status.EXHAUSTED
    nar_done = nar.status is Status.EXHAUSTED
    if sld_done and nar_done:
        return EQUAL if a == b else MISMATCH
    if not sld_done and nar_done:
        return SLD_LIMIT if a <= b else MISMATCH
    if sld_done and not nar_done:
        return NARROW_LIMIT if b <= a else MISMATCH
    return SLD_LIMIT if (a <= b or b <= a) else MISMATCH


def compare(
    program: LogicProgram,
    goal: Goal,
    mode: TransformMode = TransformMode(),
    limits: Limits | None = None,
    infer: bool = True,
    respos: ResPosMap | None = None,
) -> Comparison:
    limits = limits or Limits()
    names = goal_variables(goal)
    sld = solve(program, goal, limits)
    tr = translate(program, goal, mode, infer, respos)
    nar = narrow(tr.program, tr.query, limits)
    a = sld.answer_set()
    b = set(narrow_answers(tr, nar, names))
    return Comparison(verdict(sld, nar, a, b), names, sld, nar, a, b)


# ---------------------------------------------------------------------------
# benchmark suite

CSV_COLUMNS = ("program", "mode", "engine", "answers", "steps", "status")
MANIFEST = "suite.json"


class ManifestError(Exception):
    pass


@dataclass
class BenchRow:
    program: str
    mode: str
    engine: str
    answers: int
    steps: int
    status: str

    def as_tuple(self) -> tuple:
        return (self.program, self.mode, self.engine, self.answers, self.steps, self.status)


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    verdicts: dict[tuple[str, str], str] = field(default_factory=dict)
    answers: dict[tuple[str, str], set[AnswerKey]] = field(default_factory=dict)

    def table(self) -> str:
        data = [CSV_COLUMNS] + [tuple(str(x) for x in r.as_tuple()) for r in self.rows]
        widths = [max(len(row[i]) for row in data) for i in range(len(CSV_COLUMNS))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in data]
        lines.append("")
        for (name, mode), v in self.verdicts.items():
            lines.append(f"{name} sld vs {mode}: {v}")
        return "\n".join(lines) + "\n"

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.as_tuple())
        return buf.getvalue()


def load_manifest(suite: Path) -> list[dict]:
    path = suite / MANIFEST
    if not path.is_file():
        raise ManifestError(f"{path}: manifest not found")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: {exc}") from exc
    entries = data.get("entries") if isinstance(data, dict) else None
    if not isinstance(entries, list):
        raise ManifestError(f"{path}: expected an object with an 'entries' list")
    for e in entries:
        missing = {"name", "program", "goal"} - set(e)
        if missing:
            raise ManifestError(f"{path}: entry lacks {sorted(missing)}")
    return entries


def run_bench(suite: Path) -> BenchReport:
    from .prolog import parse_goal, parse_program

    report = BenchReport()
    for entry in load_manifest(suite):
        name = entry["name"]
        src = (suite / entry["program"]).read_text(encoding="utf-8")
        program = parse_program(src, entry["program"])
        goal = parse_goal(entry["goal"])
        limits = Limits(**entry.get("limits", {}))
        names = goal_variables(goal)
        sld = solve(program, goal, limits)
        sld_set = sld.answer_set()
        report.rows.append(BenchRow(name, "-", "sld", len(sld.answers), sld.total_steps, sld.status.value))
        report.answers[(name, "sld")] = sld_set
        for mode in entry.get("modes", ["conservative", "functional", "demand"]):
            tr = translate(program, goal, TransformMode(mode))
            nar = narrow(tr.program, tr.query, limits)
            keys = narrow_answers(tr, nar, names)
            report.rows.append(BenchRow(name, mode, "narrow", len(keys), nar.total_steps, nar.status.value))
            report.answers[(name, mode)] = set(keys)
            report.verdicts[(name, mode)] = verdict(sld, nar, sld_set, set(keys))
    return report
