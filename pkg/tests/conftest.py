import pytest

_REPORT: list[str] = []


@pytest.fixture
def report():
    """Collects one-line acceptance verdicts for the terminal summary."""
    return _REPORT.append


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
