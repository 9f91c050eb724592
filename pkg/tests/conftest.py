import pytest

_LOG = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(pytestconfig):
    """Append ``(number, title, passed, detail)``; printed at the end of the run."""
    return pytestconfig.stash.setdefault(_LOG, [])


def pytest_terminal_summary(terminalreporter, config):
    rows = config.stash.get(_LOG, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(rows, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number} ({title}): {detail}")
