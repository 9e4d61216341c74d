import pytest

from zeroconc.spectral import SpectralModel


@pytest.fixture(scope="session")
def gaussian():
    return SpectralModel.gaussian()


@pytest.fixture(scope="session")
def band():
    return SpectralModel.band(1.0)


@pytest.fixture(scope="session")
def bilateral():
    return SpectralModel.bilateral_exponential()


@pytest.fixture(scope="session", params=["band", "gaussian", "bilateral_exponential"])
def named_model(request):
    return SpectralModel.from_name(request.param)


# -- one summary line per acceptance criterion -------------------------------

_CRITERIA = {}
_NOTES = {}


def _criterion(item_name):
    # tests are named test_criterion_<n>_<what>
    parts = item_name.split("_")
    if len(parts) > 2 and parts[0] == "test" and parts[1] == "criterion" and parts[2].isdigit():
        return int(parts[2])
    return None


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    n = _criterion(report.nodeid.split("::")[-1])
    if n is None:
        return
    ok = report.passed or (report.when != "call" and not report.failed)
    if report.when == "call" or report.failed:
        prev = _CRITERIA.get(n, True)
        _CRITERIA[n] = prev and ok and not report.skipped


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _CRITERIA[n] else 'FAIL'}")
        for line in _NOTES.get(n, []):
            terminalreporter.write_line(f"    {line}")


@pytest.fixture
def note(request):
    """Attach a measured value to the summary line of the current criterion."""
    n = _criterion(request.node.name)

    def add(text):
        _NOTES.setdefault(n, []).append(text)
    return add
