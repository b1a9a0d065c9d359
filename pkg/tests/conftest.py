import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Record one pass/fail line per acceptance criterion.

    The lines are echoed in the terminal summary so the verdicts survive
    pytest's output capture.
    """

    def record(number, label, ok, detail=""):
        line = "[%2d/12] %-38s %s" % (number, label,
                                      "PASS" if ok else "FAIL")
        if detail:
            line += "  (%s)" % detail
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
