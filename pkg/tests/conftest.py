import pytest

# one status line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    def record(key, line):
        ACCEPTANCE_LINES[key] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=str):
        terminalreporter.write_line(f"[{key}] {ACCEPTANCE_LINES[key]}")
