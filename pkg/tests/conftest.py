import contextlib
import time

import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Context manager that records one PASS/FAIL line for an acceptance criterion."""

    @contextlib.contextmanager
    def record(number, title):
        notes: list[str] = []
        start = time.perf_counter()
        status = "FAIL"
        try:
            yield notes
            status = "PASS"
        finally:
            took = time.perf_counter() - start
            detail = "; ".join(notes)
            line = f"criterion {number} {status}: {title} ({took:.1f}s)"
            _LINES.append(line + (f" [{detail}]" if detail else ""))
            print(_LINES[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
