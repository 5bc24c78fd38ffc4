"""Collect acceptance outcomes and print one PASS/FAIL line per criterion."""
import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(criterion, passed, detail):
        ACCEPTANCE[criterion] = (bool(passed), detail)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0].lstrip("AC"))):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
