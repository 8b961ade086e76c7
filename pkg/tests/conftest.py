from pathlib import Path

import pytest

from ququart import config, get_medium

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def bbo():
    return get_medium("BBO")


@pytest.fixture(scope="session")
def quartz():
    return get_medium("quartz")


@pytest.fixture(scope="session")
def ref_run():
    return config.load(CONFIGS / "reference.cfg")


@pytest.fixture(scope="session")
def ref(ref_run):
    return ref_run.source


@pytest.fixture(scope="session")
def degenerate():
    return config.load(CONFIGS / "degenerate.cfg").source


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        previous = _ACCEPTANCE.get(number, (title, "PASS"))[1]
        status = "PASS" if report.outcome == "passed" and previous == "PASS" else "FAIL"
        _ACCEPTANCE[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
