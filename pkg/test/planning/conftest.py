"""Planning fixtures: small routes and their trajectories."""

import pytest

from ctssim.core.map_model import parse_map
from ctssim.planning.global_planner import plan_route
from ctssim.planning.local_planner import ComfortLevel, LocalPlanner


@pytest.fixture
def normal_comfort():
    return ComfortLevel.from_name("normal")


@pytest.fixture
def straight_route():
    """100 m straight road as (graph, path)."""
    graph = parse_map(
        "node A 0 0 station\nnode B 100 0 station\nedge A B 100 3\n"
    ).graph
    return graph, plan_route(graph, (0, 0), (100, 0))


@pytest.fixture
def straight_trajectory(straight_route, normal_comfort):
    """Profiled 100 m straight, 5 primitives of 20 m, 0.25 m spacing."""
    graph, path = straight_route
    _, trajectory = LocalPlanner().plan(path, graph, normal_comfort, 3.0)
    return trajectory


@pytest.fixture
def corner_route(corner_document):
    graph = corner_document.graph
    return graph, plan_route(graph, (0, 0), (20, 20))
