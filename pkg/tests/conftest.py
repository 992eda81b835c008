import sys
import numpy as np
import pytest

from sensewall import DetectorParams, FusionRule, NetworkConfig, SensorProfile, UncertaintyBound


def make_network(Ls, snrs, rule, p=2.0, N=1000, powers=None):
    powers = powers or [1.0] * len(Ls)
    sensors = [SensorProfile(UncertaintyBound(L), g, w) for L, g, w in zip(Ls, snrs, powers)]
    return NetworkConfig(sensors, DetectorParams(p, N), rule)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
