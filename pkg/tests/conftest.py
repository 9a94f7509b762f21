"""Shared pytest hooks: the acceptance module records one line per criterion
and this file prints the scoreboard after the run."""

ACCEPTANCE = {}


def record(num: int, description: str, passed: bool) -> None:
    ACCEPTANCE[num] = (description, bool(passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        description, passed = ACCEPTANCE[num]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {description}")
