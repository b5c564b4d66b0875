"""Local planning: Bezier-blended geometry, sampling, horizon clipping and speed profile.

The raw node route is turned into straights joined by cubic Bezier blends at
every turning node. The blend for a corner at node ``B`` with offset ``d``
starts at ``P0 = B - d*u_in`` and ends at ``P3 = B + d*u_out``; the inner
control points sit halfway between each end and the corner, which keeps the
joins tangent-continuous with the adjacent straights.
"""

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from ctssim.core.map_model import MapGraph
from ctssim.planning.global_planner import GlobalPath, NoRouteError
from ctssim.utils.geometry import Point, nearest_index, wrap_angle
from ctssim.utils.logger import get_logger

logger = get_logger("ctssim.planner.local")

DEFAULT_CORNER_OFFSET = 3.0
DEFAULT_SAMPLE_SPACING = 0.25
DEFAULT_MAX_SEGMENT_LENGTH = 20.0
DEFAULT_K_MAX = 0.48

_COLLINEAR_TOLERANCE = 1e-9
_MIN_TANGENT = 1e-12
_ARC_TABLE_MIN = 256


class DegenerateGeometryError(Exception):
    """Raised for coincident points or curves without a tangent."""

    pass


class DomainError(Exception):
    """Raised when a curve parameter is outside [0, 1]."""

    pass


class SingularDerivativeError(Exception):
    """Raised when curvature is requested where the tangent vanishes."""

    pass


class EmptyTrajectoryError(Exception):
    """Raised when an operation needs at least one trajectory point."""

    pass


# ---------------------------------------------------------------------------
# Comfort levels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComfortLevel:
    """Passenger comfort limits used by the speed profile."""

    level: str
    a_lat_max: float
    a_long_max: float

    def __post_init__(self) -> None:
        if not (self.a_lat_max > 0 and self.a_long_max > 0):
            raise ValueError(f"Comfort level '{self.level}' needs positive limits")

    @classmethod
    def from_name(
        cls, name: str, table: dict[str, dict[str, float]] | None = None
    ) -> "ComfortLevel":
        """
        Look up a comfort level by name.

        Args:
            name: One of ``comfortable``, ``normal``, ``aggressive``
            table: Optional override table ``{name: {a_lat_max, a_long_max}}``

        Returns:
            ComfortLevel instance

        Raises:
            KeyError: If the name is not in the table
        """
        levels = COMFORT_LEVELS if table is None else table
        limits = levels[name]
        return cls(name, float(limits["a_lat_max"]), float(limits["a_long_max"]))


COMFORT_LEVELS: dict[str, dict[str, float]] = {
    "comfortable": {"a_lat_max": 0.5, "a_long_max": 0.5},
    "normal": {"a_lat_max": 1.0, "a_long_max": 1.0},
    "aggressive": {"a_lat_max": 1.5, "a_long_max": 1.5},
}


# ---------------------------------------------------------------------------
# Geometry primitives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Straight:
    """Straight piece between two distinct points."""

    p_start: Point
    p_end: Point

    def __post_init__(self) -> None:
        if self.length == 0.0:
            raise DegenerateGeometryError(f"Straight with coincident ends {self.p_start}")

    @property
    def length(self) -> float:
        (x0, y0), (x1, y1) = self.p_start, self.p_end
        return math.hypot(x1 - x0, y1 - y0)

    @property
    def heading(self) -> float:
        return wrap_angle(
            math.atan2(self.p_end[1] - self.p_start[1], self.p_end[0] - self.p_start[0])
        )


@dataclass(frozen=True)
class Bezier:
    """Cubic Bezier curve given by control points P0..P3."""

    control_points: tuple[Point, Point, Point, Point]

    def __post_init__(self) -> None:
        p0, p1, p2, p3 = self.control_points
        if p0 == p1 or p2 == p3:
            raise DegenerateGeometryError(
                "Bezier end tangents are undefined (P0 == P1 or P2 == P3)"
            )

    @cached_property
    def _array(self) -> np.ndarray:
        return np.asarray(self.control_points, dtype=float)


@dataclass(frozen=True)
class SegmentPrimitive:
    """One piece of the local plan: a Straight or a Bezier blend."""

    shape: Straight | Bezier
    segment_index: int
    speed_limit: float = math.inf

    @property
    def is_curve(self) -> bool:
        return isinstance(self.shape, Bezier)


def bezier_point(b: Bezier, t: float) -> Point:
    """
    Evaluate a cubic Bezier curve.

    Args:
        b: Curve
        t: Parameter in [0, 1]

    Returns:
        Point on the curve; exactly P0 at t=0 and P3 at t=1

    Raises:
        DomainError: If t is outside [0, 1]
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"Bezier parameter must be in [0, 1], got {t}")
    s = 1.0 - t
    weights = (s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t)
    x = sum(w * p[0] for w, p in zip(weights, b.control_points, strict=True))
    y = sum(w * p[1] for w, p in zip(weights, b.control_points, strict=True))
    return (x, y)


def _bezier_derivatives(cp: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of a cubic Bezier at parameters ``t``."""
    t = t[:, None]
    s = 1.0 - t
    d1 = 3.0 * (
        s * s * (cp[1] - cp[0]) + 2.0 * s * t * (cp[2] - cp[1]) + t * t * (cp[3] - cp[2])
    )
    d2 = 6.0 * (s * (cp[2] - 2.0 * cp[1] + cp[0]) + t * (cp[3] - 2.0 * cp[2] + cp[1]))
    return d1, d2


def _bezier_points(cp: np.ndarray, t: np.ndarray) -> np.ndarray:
    t = t[:, None]
    s = 1.0 - t
    return s**3 * cp[0] + 3.0 * s * s * t * cp[1] + 3.0 * s * t * t * cp[2] + t**3 * cp[3]


def _signed_curvature(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    speed = np.hypot(d1[:, 0], d1[:, 1])
    return cross / speed**3


def bezier_curvature(b: Bezier, t: float) -> float:
    """
    Signed curvature (left turn positive) from the analytic derivatives.

    Args:
        b: Curve
        t: Parameter in [0, 1]

    Returns:
        Curvature in 1/m

    Raises:
        DomainError: If t is outside [0, 1]
        SingularDerivativeError: If the tangent vanishes at t
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"Bezier parameter must be in [0, 1], got {t}")
    d1, d2 = _bezier_derivatives(b._array, np.array([t]))
    if math.hypot(d1[0, 0], d1[0, 1]) < _MIN_TANGENT:
        raise SingularDerivativeError(f"Bezier tangent vanishes at t={t}")
    return float(_signed_curvature(d1, d2)[0])


def _arc_table(b: Bezier, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Parameter grid and cumulative chord length along a Bezier curve."""
    t = np.linspace(0.0, 1.0, resolution + 1)
    pts = _bezier_points(b._array, t)
    steps = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    return t, np.concatenate(([0.0], np.cumsum(steps)))


def primitive_length(primitive: SegmentPrimitive) -> float:
    """Arc length of a primitive (dense chord sum for Bezier curves)."""
    if isinstance(primitive.shape, Straight):
        return primitive.shape.length
    _, cumulative = _arc_table(primitive.shape, 4 * _ARC_TABLE_MIN)
    return float(cumulative[-1])


# ---------------------------------------------------------------------------
# Geometry construction
# ---------------------------------------------------------------------------


def _unit(a: Point, b: Point) -> tuple[float, float, float]:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length = math.hypot(dx, dy)
    return dx / length, dy / length, length


def _split_straight(
    start: Point, end: Point, max_length: float, speed_limit: float, first_index: int
) -> list[SegmentPrimitive]:
    length = math.hypot(end[0] - start[0], end[1] - start[1])
    pieces = max(1, math.ceil(length / max_length - 1e-9))
    primitives = []
    for k in range(pieces):
        a = start if k == 0 else (
            start[0] + (end[0] - start[0]) * k / pieces,
            start[1] + (end[1] - start[1]) * k / pieces,
        )
        b = end if k == pieces - 1 else (
            start[0] + (end[0] - start[0]) * (k + 1) / pieces,
            start[1] + (end[1] - start[1]) * (k + 1) / pieces,
        )
        primitives.append(SegmentPrimitive(Straight(a, b), first_index + k, speed_limit))
    return primitives


def build_geometry(
    path: GlobalPath,
    graph: MapGraph,
    corner_offset: float = DEFAULT_CORNER_OFFSET,
    max_segment_length: float = DEFAULT_MAX_SEGMENT_LENGTH,
) -> list[SegmentPrimitive]:
    """
    Build the straight/Bezier geometry of a global path.

    Collinear interior nodes are merged into the surrounding straight. Each
    remaining interior node trims its two straights by
    ``min(corner_offset, half the straight length)`` and bridges them with a
    cubic Bezier. Straights longer than ``max_segment_length`` are split into
    equal pieces.

    Args:
        path: Global path (at least one node)
        graph: Road network the path was planned on
        corner_offset: Corner trim distance in meters (> 0)
        max_segment_length: Longest straight primitive in meters (> 0)

    Returns:
        Ordered primitives; empty for a single-node path

    Raises:
        DegenerateGeometryError: Coincident consecutive nodes
        NoRouteError: The path turns back on itself at a node; a vehicle
            without reverse gear cannot drive it
        ValueError: Non-positive corner_offset or max_segment_length
    """
    if corner_offset <= 0:
        raise ValueError(f"corner_offset must be > 0, got {corner_offset}")
    if max_segment_length <= 0:
        raise ValueError(f"max_segment_length must be > 0, got {max_segment_length}")

    positions = [graph.position(n) for n in path.nodes]
    if len(positions) == 1:
        return []

    for i in range(len(positions) - 1):
        if positions[i] == positions[i + 1]:
            raise DegenerateGeometryError(
                f"Nodes '{path.nodes[i]}' and '{path.nodes[i + 1]}' coincide"
            )

    # Keep the ends and every node where the direction changes
    kept = [0]
    for i in range(1, len(positions) - 1):
        ux, uy, _ = _unit(positions[kept[-1]], positions[i])
        vx, vy, _ = _unit(positions[i], positions[i + 1])
        cross, dot = ux * vy - uy * vx, ux * vx + uy * vy
        if abs(cross) < _COLLINEAR_TOLERANCE:
            if dot < 0:
                raise NoRouteError(
                    f"Route reverses direction at node '{path.nodes[i]}'; "
                    "no drivable route without reversing"
                )
            continue
        kept.append(i)
    kept.append(len(positions) - 1)

    def legs_limit(a: int, b: int) -> float:
        return min(edge.speed_limit for edge in path.edges[a:b])

    vertices = [positions[k] for k in kept]
    offsets = [0.0] * len(vertices)
    for j in range(1, len(vertices) - 1):
        _, _, len_in = _unit(vertices[j - 1], vertices[j])
        _, _, len_out = _unit(vertices[j], vertices[j + 1])
        offsets[j] = min(corner_offset, len_in / 2.0, len_out / 2.0)

    primitives: list[SegmentPrimitive] = []
    cursor = vertices[0]
    for j in range(1, len(vertices)):
        ux, uy, _ = _unit(vertices[j - 1], vertices[j])
        corner = vertices[j]
        entry = (corner[0] - offsets[j] * ux, corner[1] - offsets[j] * uy)
        limit = legs_limit(kept[j - 1], kept[j])
        if math.hypot(entry[0] - cursor[0], entry[1] - cursor[1]) > _COLLINEAR_TOLERANCE:
            primitives.extend(
                _split_straight(cursor, entry, max_segment_length, limit, len(primitives))
            )
        if j == len(vertices) - 1:
            break

        vx, vy, _ = _unit(corner, vertices[j + 1])
        exit_ = (corner[0] + offsets[j] * vx, corner[1] + offsets[j] * vy)
        half = offsets[j] / 2.0
        curve = Bezier(
            (
                entry,
                (corner[0] - half * ux, corner[1] - half * uy),
                (corner[0] + half * vx, corner[1] + half * vy),
                exit_,
            )
        )
        corner_limit = min(limit, legs_limit(kept[j], kept[j + 1]))
        primitives.append(SegmentPrimitive(curve, len(primitives), corner_limit))
        cursor = exit_

    return primitives


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryPoint:
    """Sampled trajectory point with its reference speed."""

    position: Point
    heading: float
    curvature: float
    arc_length: float
    target_speed: float = 0.0
    segment_index: int = 0
    stop: tuple[str, float] | None = None
    speed_limit: float = math.inf


@dataclass(frozen=True)
class LocalTrajectory:
    """Ordered trajectory points; ``start_index`` locates them in the route trajectory."""

    points: tuple[TrajectoryPoint, ...]
    horizon: float
    start_index: int = 0

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def xy(self) -> np.ndarray:
        return np.array([p.position for p in self.points], dtype=float).reshape(-1, 2)

    @cached_property
    def arc(self) -> np.ndarray:
        return np.array([p.arc_length for p in self.points], dtype=float)

    @property
    def length(self) -> float:
        """Arc length spanned by the points."""
        if not self.points:
            return 0.0
        return self.points[-1].arc_length - self.points[0].arc_length

    @property
    def last_segment(self) -> int:
        """Segment index of the final point."""
        if not self.points:
            raise EmptyTrajectoryError("Trajectory has no points")
        return self.points[-1].segment_index

    def with_points(self, points: list[TrajectoryPoint]) -> "LocalTrajectory":
        """Copy with replaced points (same length and indexing)."""
        return LocalTrajectory(tuple(points), self.horizon, self.start_index)


def _sample_primitive(
    primitive: SegmentPrimitive, spacing: float, arc_offset: float
) -> list[TrajectoryPoint]:
    """Points at equal arc-length steps of at most ``spacing``, both ends included."""
    shape = primitive.shape
    if isinstance(shape, Straight):
        length = shape.length
        n = max(1, math.ceil(length / spacing - 1e-9))
        heading = shape.heading
        (x0, y0), (x1, y1) = shape.p_start, shape.p_end
        points = []
        for k in range(n + 1):
            u = k / n
            pos = shape.p_end if k == n else (x0 + (x1 - x0) * u, y0 + (y1 - y0) * u)
            points.append(
                TrajectoryPoint(
                    position=pos,
                    heading=heading,
                    curvature=0.0,
                    arc_length=arc_offset + length * u,
                    segment_index=primitive.segment_index,
                    speed_limit=primitive.speed_limit,
                )
            )
        return points

    t_table, cumulative = _arc_table(shape, _ARC_TABLE_MIN)
    length = float(cumulative[-1])
    n = max(1, math.ceil(length / spacing - 1e-9))
    # Refine the table so the inversion error stays far below the spacing
    t_table, cumulative = _arc_table(shape, max(_ARC_TABLE_MIN, 16 * n))
    length = float(cumulative[-1])
    s = np.linspace(0.0, length, n + 1)
    t = np.interp(s, cumulative, t_table)
    t[0], t[-1] = 0.0, 1.0

    d1, d2 = _bezier_derivatives(shape._array, t)
    if np.any(np.hypot(d1[:, 0], d1[:, 1]) < _MIN_TANGENT):
        raise DegenerateGeometryError(f"Bezier {primitive.segment_index} has a cusp")
    curvature = _signed_curvature(d1, d2)
    headings = np.arctan2(d1[:, 1], d1[:, 0])

    points = []
    for k in range(n + 1):
        points.append(
            TrajectoryPoint(
                position=bezier_point(shape, float(t[k])),
                heading=wrap_angle(float(headings[k])),
                curvature=float(curvature[k]),
                arc_length=arc_offset + float(s[k]),
                segment_index=primitive.segment_index,
                speed_limit=primitive.speed_limit,
            )
        )
    return points


def sample_trajectory(
    primitives: list[SegmentPrimitive], spacing: float = DEFAULT_SAMPLE_SPACING
) -> LocalTrajectory:
    """
    Sample primitives into a trajectory.

    Every primitive boundary emits exactly one point (owned by the earlier
    primitive). Straights carry curvature 0; Bezier points carry the
    analytic curvature.

    Args:
        primitives: Ordered geometry
        spacing: Maximum arc-length step in meters (> 0)

    Returns:
        LocalTrajectory whose horizon is the total sampled length

    Raises:
        ValueError: If spacing is not positive
        DegenerateGeometryError: If a curve has a cusp
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    if not primitives:
        return LocalTrajectory(points=(), horizon=0.0)

    points: list[TrajectoryPoint] = []
    arc_offset = 0.0
    for primitive in primitives:
        sampled = _sample_primitive(primitive, spacing, arc_offset)
        points.extend(sampled if not points else sampled[1:])
        arc_offset = sampled[-1].arc_length

    return LocalTrajectory(points=tuple(points), horizon=arc_offset)


def clip_to_horizon(
    traj: LocalTrajectory,
    pose,
    horizon: float,
    search_from: int | None = None,
) -> LocalTrajectory:
    """
    Clip a trajectory to the part visible ahead of the vehicle.

    Args:
        traj: Trajectory to clip (usually the whole route trajectory)
        pose: Vehicle state; only ``x`` and ``y`` are used
        horizon: Forward arc length to keep in meters (> 0)
        search_from: Optional index to start the nearest-point search from.
            When given, only points within one horizon past it are candidates,
            which keeps the vehicle on its own leg of self-approaching routes.

    Returns:
        Sub-trajectory from the nearest point (ties: smallest arc length)
        up to ``horizon`` meters further along

    Raises:
        ValueError: If horizon is not positive
        EmptyTrajectoryError: If the trajectory has no points
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    if not traj.points:
        raise EmptyTrajectoryError("Cannot clip an empty trajectory")

    arc = traj.arc
    p = (pose.x, pose.y)
    if search_from is None:
        first = nearest_index(p, traj.xy)
    else:
        lo = min(max(search_from, 0), len(arc) - 1)
        hi = int(np.searchsorted(arc, arc[lo] + horizon, side="right"))
        first = lo + nearest_index(p, traj.xy[lo : max(hi, lo + 1)])

    last = int(np.searchsorted(arc, arc[first] + horizon + 1e-9, side="right"))
    return LocalTrajectory(
        points=traj.points[first:last],
        horizon=horizon,
        start_index=traj.start_index + first,
    )


def profile_velocity(
    traj: LocalTrajectory,
    comfort: ComfortLevel,
    v_cruise: float,
    k_max: float = DEFAULT_K_MAX,
) -> LocalTrajectory:
    """
    Assign comfort-limited, dynamically feasible target speeds.

    Each point is capped by ``v_cruise``, its edge speed limit and
    ``sqrt(a_lat_max / |k|)``; stop points and the final point are pinned to
    zero; a forward and a backward pass bound acceleration and deceleration
    by ``a_long_max``. Stored curvature is saturated to ``k_max``.

    Args:
        traj: Sampled trajectory
        comfort: Comfort level
        v_cruise: Cruise speed in m/s (> 0)
        k_max: Vehicle curvature limit in 1/m

    Returns:
        Trajectory with target speeds filled in

    Raises:
        ValueError: If v_cruise is not positive
    """
    if v_cruise <= 0:
        raise ValueError(f"v_cruise must be > 0, got {v_cruise}")
    points = traj.points
    if not points:
        return traj

    n = len(points)
    speeds = [0.0] * n
    for i, p in enumerate(points):
        cap = min(v_cruise, p.speed_limit)
        k = abs(p.curvature)
        if k > 0.0:
            cap = min(cap, math.sqrt(comfort.a_lat_max / k))
        speeds[i] = 0.0 if p.stop is not None else cap
    speeds[-1] = 0.0

    two_a = 2.0 * comfort.a_long_max
    for i in range(1, n):
        ds = points[i].arc_length - points[i - 1].arc_length
        speeds[i] = min(speeds[i], math.sqrt(speeds[i - 1] ** 2 + two_a * ds))
    for i in range(n - 2, -1, -1):
        ds = points[i + 1].arc_length - points[i].arc_length
        speeds[i] = min(speeds[i], math.sqrt(speeds[i + 1] ** 2 + two_a * ds))

    profiled = [
        replace(p, target_speed=v, curvature=max(-k_max, min(k_max, p.curvature)))
        for p, v in zip(points, speeds, strict=True)
    ]
    return traj.with_points(profiled)


# ---------------------------------------------------------------------------
# Planner facade
# ---------------------------------------------------------------------------


class LocalPlanner:
    """Turns a global path into the profiled route trajectory."""

    def __init__(
        self,
        corner_offset: float = DEFAULT_CORNER_OFFSET,
        sample_spacing: float = DEFAULT_SAMPLE_SPACING,
        max_segment_length: float = DEFAULT_MAX_SEGMENT_LENGTH,
        k_max: float = DEFAULT_K_MAX,
    ):
        """
        Initialize LocalPlanner.

        Args:
            corner_offset: Corner trim distance in meters
            sample_spacing: Maximum point spacing in meters
            max_segment_length: Longest straight primitive in meters
            k_max: Vehicle curvature limit in 1/m
        """
        self.corner_offset = corner_offset
        self.sample_spacing = sample_spacing
        self.max_segment_length = max_segment_length
        self.k_max = k_max

    def plan(
        self,
        path: GlobalPath,
        graph: MapGraph,
        comfort: ComfortLevel,
        v_cruise: float,
    ) -> tuple[list[SegmentPrimitive], LocalTrajectory]:
        """
        Build, sample and profile the route.

        Returns:
            (primitives, profiled route trajectory)
        """
        primitives = build_geometry(
            path, graph, self.corner_offset, self.max_segment_length
        )
        trajectory = sample_trajectory(primitives, self.sample_spacing)
        trajectory = profile_velocity(trajectory, comfort, v_cruise, self.k_max)
        curves = sum(1 for p in primitives if p.is_curve)
        logger.info(
            f"Local plan: {len(primitives)} primitives ({curves} curves), "
            f"{len(trajectory)} points over {trajectory.horizon:.1f} m"
        )
        return primitives, trajectory
