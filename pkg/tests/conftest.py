"""Shared pytest hooks.

The acceptance tests report one pass/fail line per criterion; pytest's
output capture would hide them for passing tests, so they are collected
here and echoed in the terminal summary.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
