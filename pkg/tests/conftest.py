"""Shared pytest hooks.

test_acceptance appends one line per criterion to `acceptance_lines`; the
terminal-summary hook below prints them after the run so the verdicts are
visible without -s.
"""

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance summary")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
