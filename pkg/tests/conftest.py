import numpy as np
import pytest

from pointdirac.config import RunConfig, Scenario
from pointdirac.zeta_solver import solve_stepping


@pytest.fixture(scope="session")
def default_scenario():
    return Scenario.from_config(RunConfig())


@pytest.fixture(scope="session")
def default_traj(default_scenario):
    """Default scenario on [0, 5] at h = 1e-3."""
    return solve_stepping(default_scenario.ctx, 5.0, 1e-3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
