import pytest

_criteria: list[tuple[str, str, str]] = []


@pytest.fixture
def detail(request):
    """Attach a short measurement string to the acceptance report line."""

    def note(text: str) -> None:
        request.node.acceptance_detail = text

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
    text = getattr(item, "acceptance_detail", "")
    if rep.skipped and not text:
        text = str(rep.longrepr[-1]) if isinstance(rep.longrepr, tuple) else ""
    _criteria.append((marker.args[0], status, text))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, text in sorted(_criteria, key=lambda c: int(c[0].split()[0])):
        terminalreporter.write_line(f"[{status}] criterion {name}: {text}")
