"""Road-network map model: parsing, validation, serialization and lookups.

The map document is line oriented UTF-8 text with ``#`` comments::

    node <id> <x> <y> <kind>
    edge <from> <to> <length> <speed_limit>
    stop <id> <x> <y> <duration_s>
    obstacle <x> <y> <radius> <appears_at_s> [<clears_at_s>]

Coordinates are planar meters in the local map frame. Edges are directed.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from ctssim.utils.geometry import Point, distance
from ctssim.utils.logger import get_logger

logger = get_logger("ctssim.map")

LENGTH_TOLERANCE = 1e-9


class MapSyntaxError(Exception):
    """Malformed map document; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class MapSemanticError(Exception):
    """Well-formed map document that violates a model invariant."""

    pass


class EmptyGraphError(Exception):
    """Raised when a query needs at least one node."""

    pass


class NodeKind(str, Enum):
    """Role of a map node."""

    WAYPOINT = "waypoint"
    INTERSECTION = "intersection"
    ROUNDABOUT_POINT = "roundabout_point"
    STATION = "station"


@dataclass(frozen=True)
class MapNode:
    """Intersection point of the road network."""

    id: str
    position: Point
    kind: NodeKind = NodeKind.WAYPOINT


@dataclass(frozen=True)
class MapEdge:
    """Directed drivable connection between two nodes."""

    source: str
    target: str
    length: float
    speed_limit: float


@dataclass(frozen=True)
class StopPointSpec:
    """Pre-programmed stop with its dwell duration in seconds."""

    id: str
    position: Point
    stop_duration: float


@dataclass(frozen=True)
class ObstacleSpec:
    """Static obstacle present on ``[appears_at, clears_at)`` of simulation time."""

    position: Point
    radius: float
    appears_at: float = 0.0
    clears_at: float | None = None

    def is_active(self, now: float) -> bool:
        """Whether the obstacle is present at simulation time ``now``."""
        if now < self.appears_at:
            return False
        return self.clears_at is None or now < self.clears_at


@dataclass(frozen=True)
class MapGraph:
    """Directed road network. Immutable after construction."""

    nodes: dict[str, MapNode]
    edges: tuple[MapEdge, ...]
    _adjacency: dict[str, tuple[MapEdge, ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        adjacency: dict[str, list[MapEdge]] = {node_id: [] for node_id in self.nodes}
        for edge in self.edges:
            adjacency.setdefault(edge.source, []).append(edge)
        object.__setattr__(
            self,
            "_adjacency",
            {k: tuple(sorted(v, key=lambda e: e.target)) for k, v in adjacency.items()},
        )

    def successors(self, node_id: str) -> tuple[MapEdge, ...]:
        """Outgoing edges of ``node_id`` ordered by target id."""
        return self._adjacency.get(node_id, ())

    def edge(self, source: str, target: str) -> MapEdge:
        """
        Look up the edge ``source`` → ``target``.

        Raises:
            KeyError: If the edge does not exist
        """
        for candidate in self.successors(source):
            if candidate.target == target:
                return candidate
        raise KeyError(f"No edge {source} -> {target}")

    def position(self, node_id: str) -> Point:
        """Position of a node."""
        return self.nodes[node_id].position

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class MapDocument:
    """Everything a map file defines: the graph plus stops and obstacles."""

    graph: MapGraph
    stops: tuple[StopPointSpec, ...] = ()
    obstacles: tuple[ObstacleSpec, ...] = ()


_RECORD_ARITY = {
    "node": (5, 5),
    "edge": (5, 5),
    "stop": (5, 5),
    "obstacle": (5, 6),
}


def _column_of(raw: str, index: int) -> int:
    """1-based column of the ``index``-th whitespace separated field in ``raw``."""
    position = 0
    for i, token in enumerate(raw.split()):
        position = raw.index(token, position)
        if i == index:
            return position + 1
        position += len(token)
    return len(raw) + 1


def _parse_float(raw: str, fields: list[str], index: int, line_no: int) -> float:
    try:
        value = float(fields[index])
    except ValueError as e:
        raise MapSyntaxError(
            f"expected a decimal number, got '{fields[index]}'",
            line_no,
            _column_of(raw, index),
        ) from e
    if not math.isfinite(value):
        raise MapSemanticError(f"line {line_no}: value '{fields[index]}' is not finite")
    return value


def parse_map(text: str) -> MapDocument:
    """
    Parse a map document.

    Args:
        text: Map document text

    Returns:
        MapDocument whose graph satisfies every model invariant

    Raises:
        MapSyntaxError: Unknown record tag, wrong field count or bad number
        MapSemanticError: Dangling node reference, duplicate id, edge shorter
            than its endpoints' distance, non-positive speed limit, ...
    """
    nodes: dict[str, MapNode] = {}
    edge_lines: list[tuple[int, str, str, float, float]] = []
    stops: list[StopPointSpec] = []
    obstacles: list[ObstacleSpec] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        fields = content.split()
        if not fields:
            continue

        tag = fields[0]
        if tag not in _RECORD_ARITY:
            raise MapSyntaxError(f"unknown record tag '{tag}'", line_no, _column_of(raw, 0))
        low, high = _RECORD_ARITY[tag]
        if not low <= len(fields) <= high:
            raise MapSyntaxError(
                f"'{tag}' record expects {low - 1} fields, got {len(fields) - 1}",
                line_no,
                _column_of(raw, min(len(fields), high) - 1),
            )

        if tag == "node":
            node_id = fields[1]
            if node_id in nodes:
                raise MapSemanticError(f"line {line_no}: duplicate node id '{node_id}'")
            x = _parse_float(raw, fields, 2, line_no)
            y = _parse_float(raw, fields, 3, line_no)
            try:
                kind = NodeKind(fields[4])
            except ValueError as e:
                raise MapSyntaxError(
                    f"unknown node kind '{fields[4]}'", line_no, _column_of(raw, 4)
                ) from e
            nodes[node_id] = MapNode(node_id, (x, y), kind)

        elif tag == "edge":
            length = _parse_float(raw, fields, 3, line_no)
            speed_limit = _parse_float(raw, fields, 4, line_no)
            edge_lines.append((line_no, fields[1], fields[2], length, speed_limit))

        elif tag == "stop":
            stop_id = fields[1]
            if any(s.id == stop_id for s in stops):
                raise MapSemanticError(f"line {line_no}: duplicate stop id '{stop_id}'")
            x = _parse_float(raw, fields, 2, line_no)
            y = _parse_float(raw, fields, 3, line_no)
            duration = _parse_float(raw, fields, 4, line_no)
            if duration < 0:
                raise MapSemanticError(
                    f"line {line_no}: stop '{stop_id}' has negative duration {duration}"
                )
            stops.append(StopPointSpec(stop_id, (x, y), duration))

        else:
            x = _parse_float(raw, fields, 1, line_no)
            y = _parse_float(raw, fields, 2, line_no)
            radius = _parse_float(raw, fields, 3, line_no)
            appears_at = _parse_float(raw, fields, 4, line_no)
            clears_at = _parse_float(raw, fields, 5, line_no) if len(fields) == 6 else None
            if radius <= 0:
                raise MapSemanticError(f"line {line_no}: obstacle radius must be > 0")
            if appears_at < 0:
                raise MapSemanticError(f"line {line_no}: obstacle appears_at must be >= 0")
            if clears_at is not None and clears_at <= appears_at:
                raise MapSemanticError(
                    f"line {line_no}: obstacle clears_at must be after appears_at"
                )
            obstacles.append(ObstacleSpec((x, y), radius, appears_at, clears_at))

    edges: list[MapEdge] = []
    seen_pairs: set[tuple[str, str]] = set()
    for line_no, source, target, length, speed_limit in edge_lines:
        for ref in (source, target):
            if ref not in nodes:
                raise MapSemanticError(
                    f"line {line_no}: edge references undefined node '{ref}'"
                )
        if source == target:
            raise MapSemanticError(f"line {line_no}: self-loop edge on '{source}'")
        if (source, target) in seen_pairs:
            raise MapSemanticError(f"line {line_no}: duplicate edge {source} -> {target}")
        if speed_limit <= 0:
            raise MapSemanticError(
                f"line {line_no}: edge {source} -> {target} speed limit must be > 0"
            )
        straight = distance(nodes[source].position, nodes[target].position)
        if length < straight - LENGTH_TOLERANCE:
            raise MapSemanticError(
                f"line {line_no}: edge {source} -> {target} length {length} is below "
                f"the straight-line distance {straight:.6f}"
            )
        seen_pairs.add((source, target))
        edges.append(MapEdge(source, target, length, speed_limit))

    graph = MapGraph(nodes=nodes, edges=tuple(edges))
    logger.debug(
        f"Parsed map: {len(nodes)} nodes, {len(edges)} edges, "
        f"{len(stops)} stops, {len(obstacles)} obstacles"
    )
    return MapDocument(graph=graph, stops=tuple(stops), obstacles=tuple(obstacles))


def load_map(path: str | Path) -> MapDocument:
    """
    Read and parse a map file.

    Args:
        path: Map file path

    Returns:
        Parsed MapDocument

    Raises:
        FileNotFoundError: If the file does not exist
        MapSyntaxError: If the file is not UTF-8 text (column counts bytes),
            or as for :func:`parse_map`
        MapSemanticError: As for :func:`parse_map`
    """
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line_start = raw.rfind(b"\n", 0, e.start) + 1
        raise MapSyntaxError(
            f"invalid UTF-8 byte 0x{raw[e.start]:02x} in {path.name}",
            line=raw.count(b"\n", 0, e.start) + 1,
            column=e.start - line_start + 1,
        ) from e
    document = parse_map(text)
    logger.info(
        f"Loaded map {path.name}: {len(document.graph.nodes)} nodes, "
        f"{len(document.graph.edges)} edges, {len(document.stops)} stops"
    )
    return document


def serialize_map(document: MapDocument | MapGraph) -> str:
    """
    Serialize a map back to document text.

    Floats are written with ``repr`` so parsing the output reproduces the
    exact same values.

    Args:
        document: MapDocument, or a bare MapGraph

    Returns:
        Map document text
    """
    if isinstance(document, MapGraph):
        document = MapDocument(graph=document)

    lines: list[str] = []
    for node in document.graph.nodes.values():
        x, y = node.position
        lines.append(f"node {node.id} {x!r} {y!r} {node.kind.value}")
    for edge in document.graph.edges:
        lines.append(f"edge {edge.source} {edge.target} {edge.length!r} {edge.speed_limit!r}")
    for stop in document.stops:
        x, y = stop.position
        lines.append(f"stop {stop.id} {x!r} {y!r} {stop.stop_duration!r}")
    for obstacle in document.obstacles:
        x, y = obstacle.position
        record = f"obstacle {x!r} {y!r} {obstacle.radius!r} {obstacle.appears_at!r}"
        if obstacle.clears_at is not None:
            record += f" {obstacle.clears_at!r}"
        lines.append(record)
    return "\n".join(lines) + "\n"


def nearest_node(graph: MapGraph, p: Point) -> tuple[str, float]:
    """
    Find the node nearest to a point.

    Args:
        graph: Road network
        p: Query point

    Returns:
        (node id, distance); ties resolve to the lexicographically smallest id

    Raises:
        EmptyGraphError: If the graph has no nodes
    """
    if not graph.nodes:
        raise EmptyGraphError("Cannot search an empty map graph")

    ids = sorted(graph.nodes)
    xy = np.array([graph.nodes[i].position for i in ids], dtype=float)
    d = np.hypot(xy[:, 0] - p[0], xy[:, 1] - p[1])
    best = int(np.argmin(d))
    return ids[best], float(d[best])
