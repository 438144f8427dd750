import functools

import pytest

from dtcbench import MachineParams, ScenarioConfig, run_scenario
from dtcbench.engine import RPM


@functools.lru_cache(maxsize=None)
def closed_loop(controller: str, rpm: float = 1500.0, vdc: float = 400.0, t_end: float = 1.0):
    """Cached default-scenario run; logs are shared read-only between tests."""
    cfg = ScenarioConfig(controller=controller, speed_ref=((0.0, rpm * RPM),),
                         machine=MachineParams(Vdc=vdc), t_end=t_end)
    return run_scenario(cfg)


@pytest.fixture
def run():
    return closed_loop


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
