import pytest

from dephasim import profiles
from dephasim.montecarlo import SeedSpec


@pytest.fixture
def seed():
    return SeedSpec(20261019, 0)


@pytest.fixture(params=["markovian", "submarkovian", "super_i", "super_ii"])
def builtin(request):
    return profiles.BUILTINS[request.param]()


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    label = getattr(report, "acceptance_label", None)
    if label is None:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(label, "PASS")
        _ACCEPTANCE[label] = "FAIL" if (report.outcome != "passed" or prev == "FAIL") else "PASS"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result().acceptance_label = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    key = lambda s: (int(s.split("(")[0]), s)
    for label in sorted(_ACCEPTANCE, key=key):
        terminalreporter.write_line(f"criterion {label}: {_ACCEPTANCE[label]}")
