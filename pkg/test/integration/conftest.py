"""Integration fixtures: bundled scenarios run through the full loop."""

import pytest

from ctssim.core.config import SimConfig
from ctssim.core.harness import Simulation
from ctssim.core.scenario import build_scenario
from test.conftest import CONFIGS_DIR

CORPUS = ["inria_itinerary", "leon_uturn", "leon_tent", "straight_regulation", "emergency_stop"]


def run_bundled(name):
    """Run a bundled scenario and return its SimulationResult."""
    config = SimConfig.from_yaml(CONFIGS_DIR / "scenarios" / f"{name}.yaml")
    return Simulation(build_scenario(config)).run()


@pytest.fixture(scope="module")
def scenario_result():
    """Run each bundled scenario at most once per module."""
    cache = {}

    def _get(name):
        if name not in cache:
            cache[name] = run_bundled(name)
        return cache[name]

    return _get
