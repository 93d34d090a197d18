"""Command-line interface: ``pl2flc transform|run|compare|bench``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .analysis import explain, infer_respos
from .codegen import emit_program, mangle_program
from .harness import MISMATCH, ManifestError, compare, run_bench
from .narrow import NarrowError, narrow
from .prolog import ParseError, parse_goal, parse_program
from .reader import ReadError, read_program, read_query
from .sld import EngineError, Limits, solve
from .transform import CONSERVATIVE, DEMAND, FUNCTIONAL, TransformError, TransformMode, transform_program

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2

_ERRORS = (ParseError, TransformError, ReadError, EngineError, NarrowError, OSError, UnicodeDecodeError)


def _mode_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[CONSERVATIVE, FUNCTIONAL, DEMAND], default=DEMAND)
    p.add_argument("--no-let", action="store_true", help="never introduce local bindings")
    p.add_argument("--no-infer", action="store_true", help="use result positions from directives only")


def _limit_args(p: argparse.ArgumentParser) -> None:
    d = Limits()
    p.add_argument("--max-steps", type=int, default=d.max_steps)
    p.add_argument("--max-depth", type=int, default=d.max_depth)
    p.add_argument("--max-answers", type=int, default=d.max_answers)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pl2flc", description="Translate Prolog into functional logic programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", help="translate a Prolog file")
    t.add_argument("file", type=Path)
    _mode_args(t)
    t.add_argument("--explain", action="store_true", help="print the result position analysis to stderr")
    t.add_argument("-o", "--output", type=Path)

    r = sub.add_parser("run", help="evaluate a goal or expression")
    r.add_argument("--engine", choices=["sld", "narrow"], required=True)
    r.add_argument("--strategy", choices=["id", "dfs"], default="id")
    _mode_args(r)
    _limit_args(r)
    r.add_argument("file", type=Path)
    r.add_argument("query")

    c = sub.add_parser("compare", help="run a goal under SLD and its translation under narrowing")
    _mode_args(c)
    _limit_args(c)
    c.add_argument("file", type=Path)
    c.add_argument("goal")

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("dir", type=Path)
    b.add_argument("--csv", type=Path)
    return parser


def _mode(args: argparse.Namespace) -> TransformMode:
    return TransformMode(args.mode, use_let=not args.no_let)


def _limits(args: argparse.Namespace) -> Limits:
    return Limits(args.max_steps, args.max_depth, args.max_answers)


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def cmd_transform(args: argparse.Namespace) -> int:
    program = parse_program(_read(args.file), str(args.file))
    infer = not args.no_infer
    flc = transform_program(program, infer_respos(program, infer), _mode(args))
    text = emit_program(flc)
    if args.explain:
        sys.stderr.write(explain(program, infer))
    if args.output:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    src = _read(args.file)
    if args.engine == "sld":
        program = parse_program(src, str(args.file))
        outcome = solve(program, parse_goal(args.query), _limits(args), args.strategy)
        sys.stdout.write(outcome.render())
        return EXIT_OK
    if args.file.suffix == ".pl":
        program = parse_program(src, str(args.file))
        flc = transform_program(program, infer_respos(program, not args.no_infer), _mode(args))
        target = mangle_program(flc)[0]
    else:
        target = read_program(src)
    result = narrow(target, read_query(args.query, target), _limits(args))
    sys.stdout.write(result.render())
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    program = parse_program(_read(args.file), str(args.file))
    report = compare(program, parse_goal(args.goal), _mode(args), _limits(args), not args.no_infer)
    sys.stdout.write(report.render())
    return EXIT_MISMATCH if report.verdict == MISMATCH else EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    report = run_bench(args.dir)
    sys.stdout.write(report.table())
    if args.csv:
        args.csv.write_text(report.csv(), encoding="utf-8")
    return EXIT_MISMATCH if MISMATCH in report.verdicts.values() else EXIT_OK


COMMANDS = {"transform": cmd_transform, "run": cmd_run, "compare": cmd_compare, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ManifestError as exc:
        print(f"pl2flc: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except _ERRORS as exc:
        print(f"pl2flc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"pl2flc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
