"""
pycts-sim: Stop-point scheduling simulator for automated shuttles
==================================================================

Plans a route over a road map, blends it into a Bezier-smoothed trajectory,
schedules pre-programmed stops through a release buffer and closes the loop
with a curvature controller on a kinematic vehicle.

Example usage:
    >>> from ctssim import SimConfig, Simulation, build_scenario
    >>> config = SimConfig.from_yaml('configs/scenarios/inria_itinerary.yaml')
    >>> result = Simulation(build_scenario(config)).run()
    >>> result.metrics.route_completed
    True
"""

__version__ = "0.1.0"
__license__ = "BSD"

from ctssim.core.config import SimConfig
from ctssim.core.harness import Simulation, run
from ctssim.core.scenario import Scenario, build_scenario

__all__ = [
    "__version__",
    "Scenario",
    "SimConfig",
    "Simulation",
    "build_scenario",
    "run",
]
