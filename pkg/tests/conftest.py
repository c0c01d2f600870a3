import pytest

_LINES = []


@pytest.fixture
def report_line():
    """Record one pass/fail line; all lines are repeated in the terminal summary."""
    def emit(text):
        print(text)
        _LINES.append(text)
    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
