import numpy as np
import pytest

from chanflow.core import ChannelConfig, ForcingSignal


@pytest.fixture
def unit():
    return ChannelConfig(h=1.0, nu=1.0, alpha=0.0, pi1=1.0, pi2=1.0)


@pytest.fixture
def unit_alpha():
    return ChannelConfig(h=1.0, nu=1.0, alpha=1.0, pi1=1.0, pi2=1.0)


@pytest.fixture
def ramp():
    """Forcing at rest until t = 0, then a piecewise-linear program."""
    return ForcingSignal(0.0, ((0.0, 0.0), (0.5, -1.0), (1.0, -0.5), (1.5, -2.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_log(request):
    """Record one verdict per acceptance criterion for the terminal summary."""
    log = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}" + (f": {detail}" if detail else "")
        log[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE_KEY, {})
    if log:
        terminalreporter.section("acceptance criteria")
        for number in sorted(log):
            terminalreporter.write_line(log[number])
