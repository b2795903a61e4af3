import pytest

RESULTS = {}


@pytest.fixture
def record():
    """``record(n, ok, detail)`` stores one acceptance line."""
    def _record(n, ok, detail):
        RESULTS[n] = (bool(ok), detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
