import functools
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from oracles import PRESET_TABLE  # noqa: E402

from floqdiss import FloquetSystem, FloquetTerm, load_preset, run_scenario  # noqa: E402

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by the acceptance module, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def table_system(name: str) -> FloquetSystem:
    p = PRESET_TABLE[name]
    return FloquetSystem(p["H0"], tuple(FloquetTerm(v, w) for v, w in zip(p["V"], p["omegas"])))


@functools.lru_cache(maxsize=None)
def preset_run(name: str):
    """One full pipeline run per preset, shared by every test module."""
    return run_scenario(load_preset(name))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(PRESET_TABLE))
def preset_name(request):
    return request.param
