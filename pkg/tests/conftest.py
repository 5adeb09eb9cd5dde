import pytest

_ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(number, title): acceptance criterion, summarized at the end of the run"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    _ACCEPTANCE[number] = (title, "PASS" if rep.passed else "FAIL", rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, secs = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}  ({secs:.2f} s)")
