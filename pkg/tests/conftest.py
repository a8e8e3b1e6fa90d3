import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from laxnet.network import Processor, cumulative_from_rate  # noqa: E402
from laxnet.scenario import load_scenario  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (passed, detail), filled by test_acceptance
CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def seven():
    return load_scenario("seven_unconstrained").net


@pytest.fixture
def proc_a():
    return Processor("a", 2.0, 2.0, 15.0)


@pytest.fixture
def inflow_375():
    return cumulative_from_rate([(0.0, 2.0, 37.5)], 10.0)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
