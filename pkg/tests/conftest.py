"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

import pytest

_DETAILS: dict = {}
_OUTCOMES: dict = {}


@pytest.fixture
def criterion(request):
    """Record human-readable evidence for the running acceptance criterion."""
    notes = _DETAILS.setdefault(request.node.nodeid, [])
    return notes.append


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for nodeid, outcome in _OUTCOMES.items():
        name = nodeid.split("::")[-1]
        status = "PASS" if outcome == "passed" else "FAIL"
        notes = "; ".join(_DETAILS.get(nodeid, []))
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{notes}]" if notes else ""))
