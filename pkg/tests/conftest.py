import pytest

_CRITERIA = []


@pytest.fixture
def acceptance_report():
    """Recorder for acceptance-criterion outcomes, echoed after the run."""
    def record(name, passed, detail=""):
        _CRITERIA.append((name, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        status = "PASS" if passed else "FAIL"
        suffix = f" -- {detail}" if detail else ""
        terminalreporter.write_line(f"{status}  {name}{suffix}")
