"""Prints one pass/fail line per acceptance criterion after the run."""

import pytest

# (number, label) -> passed; a criterion fails if any of its phases fails.
_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, label): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = (int(marker.args[0]), str(marker.args[1]))
    bad = report.failed or (report.when == "call" and report.skipped)
    _ACCEPTANCE[key] = _ACCEPTANCE.get(key, True) and not bad


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, label), passed in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {number:2d} ({label}): {'PASS' if passed else 'FAIL'}")
