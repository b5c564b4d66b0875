"""Global planning: shortest intersection-point route over the road graph."""

import heapq
import math
from dataclasses import dataclass

from ctssim.core.map_model import MapEdge, MapGraph, nearest_node
from ctssim.utils.geometry import Point, point_segment_distance
from ctssim.utils.logger import get_logger

logger = get_logger("ctssim.planner.global")

LENGTH_TOLERANCE = 1e-9


class NoRouteError(Exception):
    """Raised when the goal node is unreachable from the start node."""

    pass


@dataclass(frozen=True)
class GlobalPath:
    """Ordered node route with the edges traversed between consecutive nodes."""

    nodes: tuple[str, ...]
    edges: tuple[MapEdge, ...]
    total_length: float

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("GlobalPath needs at least one node")
        if len(self.edges) != len(self.nodes) - 1:
            raise ValueError("GlobalPath needs exactly one edge per consecutive node pair")

    @property
    def segment_count(self) -> int:
        """Number of node-to-node segments."""
        return len(self.edges)


def plan_route(graph: MapGraph, start: Point, goal: Point) -> GlobalPath:
    """
    Plan the minimum-length route between the nodes nearest to two points.

    Labels are ordered by (length, edge count, node-id sequence), so equal
    length routes resolve to the one with fewer edges and then to the
    lexicographically smallest node sequence.

    Args:
        graph: Road network
        start: Vehicle position, snapped to its nearest node
        goal: Destination, snapped to its nearest node

    Returns:
        GlobalPath from the start node to the goal node

    Raises:
        EmptyGraphError: If the graph has no nodes
        NoRouteError: If the goal node is unreachable
    """
    start_id, _ = nearest_node(graph, start)
    goal_id, _ = nearest_node(graph, goal)

    queue: list[tuple[float, int, tuple[str, ...], tuple[MapEdge, ...]]] = [
        (0.0, 0, (start_id,), ())
    ]
    settled: set[str] = set()

    while queue:
        cost, hops, nodes, edges = heapq.heappop(queue)
        node = nodes[-1]
        if node in settled:
            continue
        settled.add(node)

        if node == goal_id:
            path = GlobalPath(nodes=nodes, edges=edges, total_length=cost)
            logger.info(
                f"Route {start_id} -> {goal_id}: {len(nodes)} nodes, {cost:.1f} m"
            )
            return path

        for edge in graph.successors(node):
            if edge.target in settled:
                continue
            heapq.heappush(
                queue,
                (cost + edge.length, hops + 1, nodes + (edge.target,), edges + (edge,)),
            )

    raise NoRouteError(f"No route from node '{start_id}' to node '{goal_id}'")


def segment_endpoints(
    path: GlobalPath, graph: MapGraph, index: int
) -> tuple[Point, Point]:
    """Start and end positions of path segment ``index``."""
    return graph.position(path.nodes[index]), graph.position(path.nodes[index + 1])


def nearest_segment(path: GlobalPath, graph: MapGraph, p: Point) -> tuple[int, float]:
    """
    Find the path segment nearest to a point.

    A single-node path has no segments; its node counts as segment 0.

    Args:
        path: Global path
        graph: Road network the path was planned on
        p: Query point

    Returns:
        (segment index, distance); ties resolve to the smallest index
    """
    if path.segment_count == 0:
        node = graph.position(path.nodes[0])
        return 0, math.hypot(p[0] - node[0], p[1] - node[1])

    best_index, best_distance = 0, math.inf
    for index in range(path.segment_count):
        a, b = segment_endpoints(path, graph, index)
        d = point_segment_distance(p, a, b)
        if d < best_distance:
            best_index, best_distance = index, d
    return best_index, best_distance


def locate_segment(path: GlobalPath, graph: MapGraph, p: Point, hint: int) -> int:
    """
    Track the vehicle's current segment without jumping backwards.

    Only segments ``hint`` .. ``hint + 2`` are considered, so routes that
    pass close to themselves keep the segment the vehicle is actually on.

    Args:
        path: Global path
        graph: Road network
        p: Vehicle position
        hint: Segment the vehicle was on in the previous cycle

    Returns:
        Current segment index (never below ``hint``)
    """
    if path.segment_count == 0:
        return 0
    last = min(hint + 2, path.segment_count - 1)
    best_index, best_distance = hint, math.inf
    for index in range(hint, last + 1):
        a, b = segment_endpoints(path, graph, index)
        d = point_segment_distance(p, a, b)
        if d < best_distance:
            best_index, best_distance = index, d
    return best_index
