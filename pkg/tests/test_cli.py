import csv
import io
import json
import subprocess
import sys

import pytest

from pl2flc.cli import EXIT_ERROR, EXIT_MISMATCH, EXIT_OK, main
from pl2flc.harness import CSV_COLUMNS

from conftest import BENCH, DATA, GOLDEN


def test_transform_to_stdout(capsys):
    assert main(["transform", str(DATA / "example1.pl")]) == EXIT_OK
    assert capsys.readouterr().out == (GOLDEN / "example1_demand.curry").read_text()


def test_transform_options(tmp_path, capsys):
    out = tmp_path / "plus.curry"
    code = main(["transform", "--mode", "conservative", "--explain", str(DATA / "plus.pl"), "-o", str(out)])
    assert code == EXIT_OK
    assert out.read_text() == (GOLDEN / "plus_conservative.curry").read_text()
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err == "plus/3: indseq={1} respos={3} source=heuristic\n"


def test_transform_without_inference(capsys):
    assert main(["transform", "--no-infer", str(DATA / "plus.pl")]) == EXIT_OK
    assert "plus O y y = True" in capsys.readouterr().out


def test_run_sld(capsys):
    assert main(["run", "--engine", "sld", str(DATA / "plus.pl"), "plus(X,Y,s(o))"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[:2] == ["{X -> o, Y -> s(o)}", "{X -> s(o), Y -> o}"]
    assert lines[2].startswith("status: exhausted")


def test_run_narrow_on_prolog_and_curry(capsys):
    assert main(["run", "--engine", "narrow", str(DATA / "plus.pl"), "plus (S O) (S O)"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "S (S O)"
    curry = GOLDEN / "plus_functional_12.curry"
    assert main(["run", "--engine", "narrow", str(curry), "plus (S (S O))"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[:3] == ["(O, S (S O))", "(S O, S O)", "(S (S O), O)"]


def test_run_limits(capsys):
    code = main(["run", "--engine", "sld", "--max-steps", "500", str(DATA / "dup_plain.pl"), "dup([],Z)"])
    assert code == EXIT_OK
    assert capsys.readouterr().out == "status: step-limit steps=500\n"


def test_compare_exit_codes(capsys):
    assert main(["compare", str(DATA / "plus.pl"), "plus(X,Y,s(s(o)))"]) == EXIT_OK
    assert capsys.readouterr().out.rstrip().endswith("verdict: EQUAL")
    assert main(["compare", "--mode", "demand", str(DATA / "lazy.pl"), "p(R)"]) == EXIT_MISMATCH
    assert capsys.readouterr().out.rstrip().endswith("verdict: MISMATCH")


@pytest.mark.parametrize(
    "argv",
    [
        ["transform", "missing.pl"],
        ["run", "--engine", "sld", "GOAL.pl", "p"],
        ["bench", "."],
    ],
)
def test_errors_exit_one(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == EXIT_ERROR
    assert capsys.readouterr().err.startswith("pl2flc:")


def test_parse_error_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.pl"
    bad.write_text("p(X) :- !.\n")
    assert main(["transform", str(bad)]) == EXIT_ERROR
    assert "bad.pl:1" in capsys.readouterr().err


def test_bench_small_suite(tmp_path, capsys):
    (tmp_path / "plus.pl").write_text((DATA / "plus.pl").read_text())
    entry = {"name": "plus", "program": "plus.pl", "goal": "plus(X,Y,s(s(o)))", "limits": {"max_steps": 3000}}
    manifest = {"entries": [entry]}
    (tmp_path / "suite.json").write_text(json.dumps(manifest))
    out = tmp_path / "out.csv"
    assert main(["bench", str(tmp_path), "--csv", str(out)]) == EXIT_OK
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [(r[1], r[2], r[3], r[5]) for r in rows[1:]] == [
        ("-", "sld", "3", "exhausted"),
        ("conservative", "narrow", "3", "exhausted"),
        ("functional", "narrow", "3", "step-limit"),
        ("demand", "narrow", "3", "exhausted"),
    ]
    table = capsys.readouterr().out
    assert "plus sld vs demand: EQUAL" in table
    assert "plus sld vs functional: NARROW-LIMIT" in table


def test_bench_bad_manifest(tmp_path):
    (tmp_path / "suite.json").write_text('{"entries": [{"name": "x"}]}')
    assert main(["bench", str(tmp_path)]) == EXIT_ERROR


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pl2flc", "transform", str(DATA / "two.pl")], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "two_demand.curry").read_text()


def test_bench_directory_exists():
    assert (BENCH / "suite.json").is_file()
