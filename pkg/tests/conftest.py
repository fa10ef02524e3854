import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cboundary.warp import WarpProfile

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

LOGISTIC = "1/(exp(-t)+1)"


@pytest.fixture(scope="session")
def logistic_profile():
    return WarpProfile.from_expression(LOGISTIC)


@pytest.fixture(scope="session")
def unit_profile():
    return WarpProfile.unit()


def logistic_primitive(t: float) -> float:
    """Closed form of the integral of 1/alpha from 0 for the logistic profile."""
    return t + 1.0 - math.exp(-t)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
