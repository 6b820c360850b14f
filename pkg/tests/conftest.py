from __future__ import annotations

import pytest

_LINES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES] = {}


@pytest.fixture
def acceptance_record(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.stash[_LINES]

    def record(criterion: int, ok: bool, detail: str) -> None:
        lines[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
