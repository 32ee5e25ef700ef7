import pytest

from raresample.models import BUNDLED, load_bundled, perturbed_coins
from raresample.spin import SpinModel, ising_nnn_process


@pytest.fixture(scope="session")
def coins():
    return perturbed_coins(0.6, 0.8)


@pytest.fixture(scope="session")
def ising():
    return ising_nnn_process(SpinModel())


@pytest.fixture(scope="session", params=BUNDLED)
def bundled(request):
    return load_bundled(request.param)


_REPORT_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict: criterion(label, ok, detail)."""
    lines = request.config.stash[_REPORT_KEY]

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_REPORT_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("criterion ")[1]):
            terminalreporter.write_line(line)
