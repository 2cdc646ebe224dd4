import os
import re
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE = []


@pytest.fixture
def acceptance_report():
    """Record one pass/fail line per acceptance criterion."""

    def report(criterion, passed, detail):
        """``passed=None`` marks a criterion that was skipped."""
        _ACCEPTANCE.append((criterion, None if passed is None else bool(passed), detail))
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    def number(row):
        match = re.search(r"\d+", row[0])
        return int(match.group()) if match else 0

    for criterion, passed, detail in sorted(_ACCEPTANCE, key=number):
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion}: {detail}")
