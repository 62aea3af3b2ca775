import random

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def criterion():
    """Record one acceptance line; the line is printed in the terminal
    summary so it shows up even with output capture on."""
    def record(key, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        assert ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
