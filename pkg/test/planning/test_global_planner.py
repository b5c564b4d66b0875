"""Tests for global route planning."""

import math
import random

import pytest

from ctssim.core.map_model import EmptyGraphError, MapEdge, MapGraph, MapNode, parse_map
from ctssim.planning.global_planner import (
    GlobalPath,
    NoRouteError,
    locate_segment,
    nearest_segment,
    plan_route,
)
from ctssim.utils.geometry import distance


def _random_graph(rng: random.Random) -> MapGraph:
    count = rng.randint(2, 8)
    nodes = {}
    for i in range(count):
        node_id = f"n{i}"
        nodes[node_id] = MapNode(node_id, (rng.uniform(0, 100), rng.uniform(0, 100)))
    edges = []
    for source in nodes:
        for target in nodes:
            if source != target and rng.random() < 0.4:
                straight = distance(nodes[source].position, nodes[target].position)
                edges.append(MapEdge(source, target, straight * rng.uniform(1.0, 2.0), 3.0))
    return MapGraph(nodes, tuple(edges))


def _enumerate_shortest(graph: MapGraph, start: str, goal: str) -> float:
    """Minimum length over every simple path, by exhaustive search."""
    best = math.inf

    def walk(node, visited, length):
        nonlocal best
        if node == goal:
            best = min(best, length)
            return
        for edge in graph.successors(node):
            if edge.target not in visited:
                walk(edge.target, visited | {edge.target}, length + edge.length)

    walk(start, {start}, 0.0)
    return best


@pytest.mark.parametrize("seed", range(200))
def test_plan_route_matches_exhaustive_enumeration(seed):
    rng = random.Random(seed)
    graph = _random_graph(rng)
    start_id, goal_id = rng.sample(sorted(graph.nodes), 2)

    expected = _enumerate_shortest(graph, start_id, goal_id)
    start, goal = graph.position(start_id), graph.position(goal_id)

    if math.isinf(expected):
        with pytest.raises(NoRouteError):
            plan_route(graph, start, goal)
        return

    path = plan_route(graph, start, goal)
    assert path.nodes[0] == start_id
    assert path.nodes[-1] == goal_id
    assert path.total_length == pytest.approx(expected, abs=1e-9)
    assert path.total_length == pytest.approx(sum(e.length for e in path.edges), abs=1e-9)
    for i, edge in enumerate(path.edges):
        assert (edge.source, edge.target) == (path.nodes[i], path.nodes[i + 1])
        assert graph.edge(edge.source, edge.target) == edge


@pytest.mark.parametrize("seed", range(20))
def test_prefixes_are_shortest_paths(seed):
    rng = random.Random(1000 + seed)
    graph = _random_graph(rng)
    start_id, goal_id = rng.sample(sorted(graph.nodes), 2)
    try:
        path = plan_route(graph, graph.position(start_id), graph.position(goal_id))
    except NoRouteError:
        return

    length = 0.0
    for i, edge in enumerate(path.edges, start=1):
        length += edge.length
        assert length == pytest.approx(
            _enumerate_shortest(graph, start_id, path.nodes[i]), abs=1e-9
        )


def test_start_and_goal_on_same_node(two_node_map_text):
    graph = parse_map(two_node_map_text).graph

    path = plan_route(graph, (0.1, 0.0), (-0.2, 0.1))

    assert path.nodes == ("A",)
    assert path.edges == ()
    assert path.total_length == 0.0
    assert path.segment_count == 0


def test_disconnected_components():
    graph = parse_map(
        "node A 0 0 station\nnode B 10 0 station\nnode C 50 0 station\n"
        "node D 60 0 station\nedge A B 10 3\nedge C D 10 3\n"
    ).graph

    with pytest.raises(NoRouteError, match="'D'"):
        plan_route(graph, (0, 0), (60, 0))


def test_edges_are_directed(two_node_map_text):
    graph = parse_map(two_node_map_text).graph

    with pytest.raises(NoRouteError):
        plan_route(graph, (10, 0), (0, 0))


def test_empty_graph():
    with pytest.raises(EmptyGraphError):
        plan_route(MapGraph({}, ()), (0, 0), (1, 1))


def test_tie_prefers_fewer_edges():
    graph = parse_map(
        "node A 0 0 station\nnode B 5 5 waypoint\nnode D 10 0 station\n"
        "edge A B 10 3\nedge B D 10 3\nedge A D 20 3\n"
    ).graph

    assert plan_route(graph, (0, 0), (10, 0)).nodes == ("A", "D")


def test_tie_prefers_smallest_node_sequence():
    graph = parse_map(
        "node A 0 0 station\nnode C 5 -5 waypoint\nnode B 5 5 waypoint\n"
        "node D 10 0 station\n"
        "edge A C 10 3\nedge C D 10 3\nedge A B 10 3\nedge B D 10 3\n"
    ).graph

    path = plan_route(graph, (0, 0), (10, 0))

    assert path.nodes == ("A", "B", "D")
    assert path.total_length == 20.0


def test_itinerary_route(maps_dir):
    from ctssim.core.map_model import load_map

    graph = load_map(maps_dir / "inria_itinerary.map").graph

    path = plan_route(graph, (0, 0), (10, 30))

    assert path.nodes == ("S", "R0", "R1", "R2", "R3", "R4", "B", "C", "D", "E")


def test_global_path_invariants():
    with pytest.raises(ValueError):
        GlobalPath(nodes=(), edges=(), total_length=0.0)
    with pytest.raises(ValueError):
        GlobalPath(nodes=("A", "B"), edges=(), total_length=0.0)


def test_nearest_and_locate_segment(corner_document):
    graph = corner_document.graph
    path = plan_route(graph, (0, 0), (20, 20))

    assert nearest_segment(path, graph, (10, 1)) == (0, 1.0)
    assert nearest_segment(path, graph, (19, 10)) == (1, 1.0)
    # Corner point is equidistant: smallest index wins
    assert nearest_segment(path, graph, (20, 0))[0] == 0

    assert locate_segment(path, graph, (19, 10), hint=0) == 1
    assert locate_segment(path, graph, (5, 0), hint=1) == 1
