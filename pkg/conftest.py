import pytest

_ACCEPTANCE: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(label): names an acceptance criterion for the summary"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion_label = marker.args[0]


def pytest_runtest_logreport(report):
    label = getattr(report, "criterion_label", None)
    if label is None:
        return
    if report.failed:
        _ACCEPTANCE[label] = "FAIL"
    elif report.skipped:
        _ACCEPTANCE.setdefault(label, "SKIP")
    elif report.when == "call" and report.passed:
        _ACCEPTANCE.setdefault(label, "PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in _ACCEPTANCE.items():
        terminalreporter.write_line(f"[{status}] {label}")
