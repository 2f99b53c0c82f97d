"""Shared pytest plumbing.

The acceptance suite appends one line per criterion to ACCEPTANCE_LINES;
the terminal-summary hook prints them even when every test passes.
"""

from hypothesis import settings

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
