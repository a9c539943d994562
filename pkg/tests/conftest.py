import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from dscts.ingest import generate_benchmark  # noqa: E402
from dscts.model import Technology  # noqa: E402
from dscts.pipeline import RunConfig, route_instance  # noqa: E402

TECH = Technology()


def region_for(n: int) -> tuple[float, float]:
    """Benchmark die edge that keeps sink density fixed as N grows."""
    side = 3.0 * float(np.sqrt(n))
    return (side, side)


@pytest.fixture(scope="session")
def tech():
    return TECH


@pytest.fixture(scope="session")
def inst300():
    return generate_benchmark(300, region_for(300), "uniform", seed=11)


@pytest.fixture(scope="session")
def routed300(inst300):
    return route_instance(inst300, RunConfig())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
