import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results: dict[int, tuple[str, str, str]] = {}
_details: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.fixture
def record(request):
    """Attach measured values to the criterion summary line."""
    marker = request.node.get_closest_marker("criterion")
    lines = _details.setdefault(marker.args[0], []) if marker else []
    return lines.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.skipped and rep.when in ("setup", "call"):
        reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else str(rep.longrepr)
        _results[number] = ("SKIP", title, reason.replace("Skipped: ", ""))
    elif rep.failed:
        _results[number] = ("FAIL", title, str(call.excinfo.value).splitlines()[0] if call.excinfo else "")
    elif rep.when == "call" and number not in _results:
        _results[number] = ("PASS", title, "")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        status, title, why = _results[number]
        info = "; ".join(_details.get(number, [])) or why
        terminalreporter.write_line(f"{status} criterion {number}: {title}" + (f" [{info}]" if info else ""))
