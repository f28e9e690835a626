import pytest

# criterion number -> (title, outcome, details)
_CRITERIA: dict[int, list] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m:
            n, title = m.args
            _CRITERIA.setdefault(n, [title, "PASS", []])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m and rep.when == "call" and not rep.passed:
        _CRITERIA[m.args[0]][1] = "FAIL"


@pytest.fixture
def note(request):
    """Attach a measured value to the criterion's summary line."""
    m = request.node.get_closest_marker("acceptance")

    def add(text: str) -> None:
        if m:
            _CRITERIA[m.args[0]][2].append(text)
    return add


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, outcome, details = _CRITERIA[n]
        extra = f"  [{'; '.join(details)}]" if details else ""
        terminalreporter.write_line(f"criterion {n:2d} {outcome}: {title}{extra}")
