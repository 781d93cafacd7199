import sys
from pathlib import Path

import pytest

from tmkit import fixtures

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "fixture fidelity",
    2: "watch semantics",
    3: "branch semantics",
    4: "exclusivity invariant",
    5: "round-trip and parser fuzz",
    6: "simplification",
    7: "BPMN import",
    8: "determinism",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number = getattr(report, "criterion", None)
    if number is not None:
        _outcomes.setdefault(number, []).append(report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in CRITERIA.items():
        results = _outcomes.get(number)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title} ({len(results or [])} check(s))")


@pytest.fixture
def carsale():
    return fixtures.load("carsale")


@pytest.fixture
def watch():
    return fixtures.load("watch")


@pytest.fixture
def fig13_xml():
    return fixtures.path("fig13").read_bytes()
