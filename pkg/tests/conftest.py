import pytest

_criteria = {}


@pytest.fixture
def criterion(request):
    """Record a measured summary for the acceptance line of a ``criterion``-marked test."""
    marker = request.node.get_closest_marker("criterion")
    entry = _criteria.setdefault(request.node.nodeid, {"id": marker.args[0], "notes": []})
    return entry["notes"].append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    entry = _criteria.setdefault(item.nodeid, {"id": marker.args[0], "notes": []})
    entry["title"] = marker.args[1]
    entry["passed"] = report.passed


def pytest_terminal_summary(terminalreporter):
    rows = [e for e in _criteria.values() if "passed" in e]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for e in sorted(rows, key=lambda e: e["id"]):
        status = "PASS" if e["passed"] else "FAIL"
        detail = "; ".join(e["notes"])
        terminalreporter.write_line(f"criterion {e['id']:>2} {status}: {e['title']}"
                                    + (f" ({detail})" if detail else ""))
