import sys

import numpy as np
import pytest

from vacuum_nozzle.background import GasParams
from vacuum_nozzle.march import default_profiles, march


@pytest.fixture(scope="session")
def params():
    return GasParams.from_entrance()


@pytest.fixture(scope="session")
def profiles(params):
    return default_profiles(params.phi0)


@pytest.fixture(scope="session")
def trace_eps(params, profiles):
    """eps = 1e-3 to r = 100 with log-spaced output radii."""
    return march(profiles, 1e-3, 100.0, params, r_out=np.logspace(0.0, 2.0, 41)[1:-1])


@pytest.fixture(scope="session")
def trace_zero(params, profiles):
    return march(profiles, 0.0, 100.0, params, r_out=np.logspace(0.0, 2.0, 21)[1:-1])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
