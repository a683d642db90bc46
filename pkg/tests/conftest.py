import contextlib

import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the assertion outcome decides PASS or FAIL."""

    @contextlib.contextmanager
    def record(label, detail=lambda: ""):
        try:
            yield
        except BaseException:
            _CRITERIA.append(("FAIL", label, detail()))
            raise
        _CRITERIA.append(("PASS", label, detail()))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for status, label, detail in _CRITERIA:
        terminalreporter.write_line(f"{status}  {label}" + (f"  [{detail}]" if detail else ""))
