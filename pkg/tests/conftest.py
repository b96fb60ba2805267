import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the terminal summary and return the verdict."""

    def _report(label: str, ok: bool, detail: str) -> bool:
        _LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
