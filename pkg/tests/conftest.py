"""Collects one summary line per acceptance criterion and prints them after the run."""

import pytest

_LINES: dict[int, tuple[bool, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.fixture
def detail(request):
    """Callable that attaches a one-line measurement summary to the running criterion."""

    def record(text: str) -> None:
        request.node.acceptance_detail = text

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    text = getattr(item, "acceptance_detail", "")
    if rep.failed and not text:
        text = f"error: {call.excinfo.typename}" if call.excinfo else "error"
    _LINES[number] = (rep.passed, title, text)


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        ok, title, text = _LINES[n]
        terminalreporter.write_line(f"AC{n} {'PASS' if ok else 'FAIL'}  {title}: {text}")
