"""Shared test plumbing: collects acceptance-criterion outcomes for the summary."""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion_report():
    """Callable recording one pass/fail line per acceptance criterion."""

    def _report(label: str, ok: bool, detail: str) -> None:
        line = f"[{label}] {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
