"""Tests for the road-network map model."""

import math
import random

import pytest

from ctssim.core.map_model import (
    EmptyGraphError,
    MapDocument,
    MapEdge,
    MapGraph,
    MapNode,
    MapSemanticError,
    MapSyntaxError,
    NodeKind,
    ObstacleSpec,
    StopPointSpec,
    load_map,
    nearest_node,
    parse_map,
    serialize_map,
)
from ctssim.utils.geometry import distance


def test_parse_minimal_map(two_node_map_text):
    document = parse_map(two_node_map_text)

    assert len(document.graph.nodes) == 2
    assert len(document.graph.edges) == 1
    edge = document.graph.edges[0]
    assert (edge.source, edge.target, edge.length, edge.speed_limit) == ("A", "B", 10.0, 3.0)
    assert document.graph.nodes["A"].kind is NodeKind.STATION
    assert document.stops == ()
    assert document.obstacles == ()


def test_parse_stops_obstacles_and_comments():
    document = parse_map(
        """
# header comment

node A 0 0 station   # inline comment
node B 10 0 waypoint
edge A B 10 2.5
stop s1 5 0 30
obstacle 7 0.5 0.5 12
obstacle 8 0 1 3 9
"""
    )

    assert document.stops == (StopPointSpec("s1", (5.0, 0.0), 30.0),)
    assert document.obstacles[0] == ObstacleSpec((7.0, 0.5), 0.5, 12.0, None)
    assert document.obstacles[1].clears_at == 9.0


def test_obstacle_activity_window():
    obstacle = ObstacleSpec((0.0, 0.0), 1.0, appears_at=2.0, clears_at=5.0)

    assert not obstacle.is_active(1.99)
    assert obstacle.is_active(2.0)
    assert obstacle.is_active(4.99)
    assert not obstacle.is_active(5.0)
    assert ObstacleSpec((0.0, 0.0), 1.0).is_active(1e6)


def test_dangling_reference_names_node():
    text = "node A 0 0 station\nedge A Z 10 3\n"
    with pytest.raises(MapSemanticError, match="Z"):
        parse_map(text)


def test_edge_shorter_than_node_distance():
    text = "node A 0 0 station\nnode B 10 0 station\nedge A B 5 3\n"
    with pytest.raises(MapSemanticError, match="straight-line"):
        parse_map(text)


def test_edge_length_tolerance():
    text = "node A 0 0 station\nnode B 10 0 station\nedge A B 9.9999999999 3\n"
    graph = parse_map(text).graph
    assert graph.edges[0].length == pytest.approx(10.0)


def test_unknown_tag_reports_line_and_column():
    text = "node A 0 0 station\n  road A B\n"
    with pytest.raises(MapSyntaxError) as exc_info:
        parse_map(text)

    assert exc_info.value.line == 2
    assert exc_info.value.column == 3
    assert "road" in str(exc_info.value)


def test_bad_number_reports_column():
    with pytest.raises(MapSyntaxError) as exc_info:
        parse_map("node A x 0 station\n")

    assert exc_info.value.line == 1
    assert exc_info.value.column == 8


@pytest.mark.parametrize(
    "text",
    [
        "edge A B 10\n",
        "node A 0 0\n",
        "stop s1 0 0\n",
        "obstacle 1 2 3\n",
        "obstacle 1 2 3 4 5 6\n",
        "node A 0 0 parking\n",
    ],
)
def test_syntax_errors(text):
    with pytest.raises(MapSyntaxError):
        parse_map(text)


@pytest.mark.parametrize(
    "text",
    [
        "node A 0 0 station\nnode A 1 1 station\n",
        "node A 0 0 station\nnode B 10 0 station\nedge A B 10 0\n",
        "node A 0 0 station\nnode B 10 0 station\nedge A B 10 -1\n",
        "node A 0 0 station\nedge A A 1 3\n",
        "node A 0 0 station\nnode B 10 0 station\nedge A B 10 3\nedge A B 12 3\n",
        "node A nan 0 station\n",
        "stop s1 0 0 -1\n",
        "stop s1 0 0 5\nstop s1 1 1 5\n",
        "obstacle 0 0 0 1\n",
        "obstacle 0 0 1 -1\n",
        "obstacle 0 0 1 5 5\n",
    ],
)
def test_semantic_errors(text):
    with pytest.raises(MapSemanticError):
        parse_map(text)


def test_successors_and_edge_lookup():
    document = parse_map(
        "node A 0 0 station\nnode C 0 5 station\nnode B 5 0 station\n"
        "edge A C 5 3\nedge A B 5 3\n"
    )
    graph = document.graph

    assert [e.target for e in graph.successors("A")] == ["B", "C"]
    assert graph.successors("B") == ()
    assert graph.edge("A", "C").length == 5.0
    with pytest.raises(KeyError):
        graph.edge("B", "A")


def _random_document(rng: random.Random) -> MapDocument:
    kinds = list(NodeKind)
    nodes = {}
    for i in range(rng.randint(1, 12)):
        node_id = f"n{i}"
        position = (rng.uniform(-500, 500), rng.uniform(-500, 500))
        nodes[node_id] = MapNode(node_id, position, rng.choice(kinds))
    ids = list(nodes)
    edges = []
    for source in ids:
        for target in ids:
            if source != target and rng.random() < 0.3:
                straight = distance(nodes[source].position, nodes[target].position)
                edges.append(
                    MapEdge(
                        source,
                        target,
                        straight * (1.0 + rng.random()),
                        rng.uniform(0.5, 15.0),
                    )
                )
    stops = tuple(
        StopPointSpec(f"s{i}", (rng.uniform(-50, 50), rng.uniform(-50, 50)), rng.random() * 60)
        for i in range(rng.randint(0, 3))
    )
    obstacles = (ObstacleSpec((rng.random(), rng.random()), 0.1 + rng.random(), 1.5, 7.25),)
    return MapDocument(MapGraph(nodes, tuple(edges)), stops, obstacles)


@pytest.mark.parametrize("seed", range(20))
def test_serialize_round_trip(seed):
    document = _random_document(random.Random(seed))

    assert parse_map(serialize_map(document)) == document


def test_serialize_bare_graph(two_node_map_text):
    graph = parse_map(two_node_map_text).graph

    assert parse_map(serialize_map(graph)).graph == graph


def test_nearest_node_exact_and_tie(two_node_map_text):
    graph = parse_map(two_node_map_text).graph

    assert nearest_node(graph, (0.0, 0.0)) == ("A", 0.0)
    assert nearest_node(graph, (5.0, 0.0)) == ("A", 5.0)
    assert nearest_node(graph, (9.0, 0.0)) == ("B", 1.0)


@pytest.mark.parametrize("seed", range(10))
def test_nearest_node_matches_exhaustive_scan(seed):
    rng = random.Random(seed)
    nodes = {
        f"n{i}": MapNode(f"n{i}", (rng.uniform(0, 100), rng.uniform(0, 100)))
        for i in range(10)
    }
    graph = MapGraph(nodes, ())
    p = (rng.uniform(0, 100), rng.uniform(0, 100))

    node_id, d = nearest_node(graph, p)

    best = min(distance(p, n.position) for n in nodes.values())
    assert d == pytest.approx(best)
    assert all(d <= distance(p, n.position) + 1e-12 for n in nodes.values())
    assert math.isclose(distance(p, nodes[node_id].position), d)


def test_nearest_node_empty_graph():
    with pytest.raises(EmptyGraphError):
        nearest_node(MapGraph({}, ()), (0.0, 0.0))


def test_load_bundled_itinerary(maps_dir):
    document = load_map(maps_dir / "inria_itinerary.map")

    assert len(document.graph.nodes) == 13
    assert len(document.graph.edges) == 18
    assert [s.id for s in document.stops] == ["s1", "s2", "s3", "s4"]
    assert [s.stop_duration for s in document.stops] == [30.0, 25.0, 15.0, 10.0]


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_map(tmp_path / "missing.map")


def test_load_non_utf8_file(tmp_path):
    map_file = tmp_path / "latin1.map"
    map_file.write_bytes(b"node A 0 0 station\nnode B 2\xff 0 station\n")

    with pytest.raises(MapSyntaxError, match="line 2, column 9") as excinfo:
        load_map(map_file)
    assert (excinfo.value.line, excinfo.value.column) == (2, 9)
    assert "0xff" in str(excinfo.value)


def test_load_crlf_file(tmp_path, two_node_map_text):
    map_file = tmp_path / "crlf.map"
    map_file.write_bytes(two_node_map_text.replace("\n", "\r\n").encode())

    assert load_map(map_file).graph == parse_map(two_node_map_text).graph
