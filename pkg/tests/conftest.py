"""Collects acceptance result lines and prints them after the run."""

_ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance results")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
