"""Shared pytest wiring.

Acceptance tests carry ``@pytest.mark.criterion(number, text)``; the
terminal summary prints one PASS/FAIL line per criterion.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}
_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    if report.when == "call" or report.failed:
        passed = report.passed and _outcomes.get(report.nodeid, True)
        _outcomes[report.nodeid] = passed
    elif report.skipped:
        _outcomes[report.nodeid] = False


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (number, text) in sorted(_criteria.items(), key=lambda kv: kv[1][0]):
        if nodeid not in _outcomes:
            continue
        status = "PASS" if _outcomes[nodeid] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {text}")
