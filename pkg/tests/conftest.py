import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from elecshock import synth

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session")
def small_sim():
    """Three short cycles; enough for exact-identity checks."""
    return synth.simulate_dgp(synth.DgpConfig(n_cycles=3, days_per_cycle=120, seed=11))


@pytest.fixture(scope="session")
def default_sim():
    return synth.simulate_dgp(synth.DgpConfig(seed=5))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one acceptance line: ``record(criterion, passed, detail)``."""
    def record(criterion, passed, detail=""):
        tag = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        line = f"[{tag}] {criterion}: {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
