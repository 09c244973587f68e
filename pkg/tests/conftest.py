import pytest

_criteria = {}


@pytest.fixture
def note(request):
    """Attach a one-line detail to the current acceptance criterion."""
    lines = []
    request.node.user_properties.append(("notes", lines))
    return lines.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    notes = next((v for k, v in item.user_properties if k == "notes"), [])
    _criteria[marker.args[0]] = (rep.passed, marker.args[1], list(notes))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        passed, title, notes = _criteria[num]
        line = f"criterion {num}: {'PASS' if passed else 'FAIL'}  {title}"
        if notes:
            line += "  [" + "; ".join(notes) + "]"
        terminalreporter.write_line(line)
