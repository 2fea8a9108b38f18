import pytest

ACCEPTANCE_RESULTS = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts afterwards."""
    def report(label, ok, detail=""):
        ACCEPTANCE_RESULTS.append((label, bool(ok), detail))
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
