from __future__ import annotations

import os
import re
import socket
from pathlib import Path

import pytest

from pl2flc.prolog import parse_program

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"
GOLDEN = ROOT / "tests" / "golden"
BENCH = ROOT / "bench"

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")
_outcomes: dict[int, list[tuple[str, str]]] = {}


OFFLINE_ENV = "PL2FLC_OFFLINE"


@pytest.fixture(autouse=True, scope="session")
def _no_network():
    """Under ``PL2FLC_OFFLINE=1`` any socket connection fails the run."""
    if os.environ.get(OFFLINE_ENV) != "1":
        yield
        return

    def refuse(*args, **kwargs):
        raise RuntimeError("network access attempted during tests")

    saved = socket.socket.connect, socket.create_connection
    socket.socket.connect, socket.create_connection = refuse, refuse
    try:
        yield
    finally:
        socket.socket.connect, socket.create_connection = saved


def load(name: str):
    return parse_program((DATA / name).read_text(encoding="utf-8"), name)


@pytest.fixture
def data_program():
    return load


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(int(m.group(1)), []).append((m.group(2), report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        ok = all(outcome == "passed" for _, outcome in results)
        names = ", ".join(name for name, _ in results)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({names})")
