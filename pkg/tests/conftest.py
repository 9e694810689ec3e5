import re

import pytest

_titles = {}
_details = {}
_outcomes = {}


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the acceptance summary."""

    def record(text):
        _details[request.node.nodeid] = text

    return record


def _criterion(nodeid):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", nodeid)
    return int(m.group(1)) if m else None


def pytest_collection_modifyitems(items):
    for item in items:
        if _criterion(item.nodeid) is not None:
            doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
            _titles[item.nodeid] = doc


def pytest_runtest_logreport(report):
    if _criterion(report.nodeid) is None:
        return
    if report.when == "call" or report.failed:
        _outcomes.setdefault(report.nodeid, report.outcome)
        if report.failed:
            _outcomes[report.nodeid] = "failed"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_outcomes, key=_criterion):
        verdict = "PASS" if _outcomes[nodeid] == "passed" else "FAIL"
        line = f"criterion {_criterion(nodeid):2d}: {verdict}  {_titles.get(nodeid, nodeid)}"
        if nodeid in _details:
            line += f"  [{_details[nodeid]}]"
        terminalreporter.write_line(line)
