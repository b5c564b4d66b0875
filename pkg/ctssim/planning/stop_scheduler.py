"""Stop scheduling: condition checks, trajectory insertion and the release buffer.

A pre-programmed stop goes through ``Pending -> Buffered -> Dispatched ->
Completed``. The global conditions move it into the buffer, the local
conditions place it on the trajectory, and the buffer withholds every point
past an unfinished stop until its dwell time has elapsed.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ctssim.core.map_model import MapGraph, StopPointSpec
from ctssim.planning.global_planner import GlobalPath, locate_segment, nearest_segment
from ctssim.planning.local_planner import (
    DEFAULT_K_MAX,
    ComfortLevel,
    EmptyTrajectoryError,
    LocalTrajectory,
    TrajectoryPoint,
    profile_velocity,
)
from ctssim.utils.geometry import distance, nearest_index, polyline_distances
from ctssim.utils.logger import get_logger

logger = get_logger("ctssim.scheduler")

DEFAULT_ARRIVAL_RADIUS = 0.5
DEFAULT_ARRIVAL_SPEED = 0.05
DEFAULT_LOCAL_DISTANCE = 5.0


class IllegalStateError(Exception):
    """Raised on a stop state transition that skips or revisits a state."""

    pass


class StopIndexError(IndexError):
    """Raised when a stop insertion index is outside the trajectory."""

    pass


class StopState(str, Enum):
    """Lifecycle of a pre-programmed stop."""

    PENDING = "Pending"
    BUFFERED = "Buffered"
    DISPATCHED = "Dispatched"
    COMPLETED = "Completed"


_NEXT_STATE = {
    StopState.PENDING: StopState.BUFFERED,
    StopState.BUFFERED: StopState.DISPATCHED,
    StopState.DISPATCHED: StopState.COMPLETED,
}


@dataclass
class StopPoint:
    """Runtime state of one stop."""

    spec: StopPointSpec
    state: StopState = StopState.PENDING
    dispatched_at: float | None = None
    resume_at: float | None = None
    arrived_at: float | None = None
    route_index: int | None = None

    @property
    def id(self) -> str:
        return self.spec.id

    def advance(self, target: StopState) -> None:
        """
        Move to the next lifecycle state.

        Raises:
            IllegalStateError: If ``target`` is not the direct successor
        """
        if _NEXT_STATE.get(self.state) != target:
            raise IllegalStateError(
                f"Stop '{self.id}' cannot go from {self.state.value} to {target.value}"
            )
        logger.info(f"Stop '{self.id}': {self.state.value} -> {target.value}")
        self.state = target


@dataclass
class StopBuffer:
    """Gate between the planner and the controller.

    ``release_index`` is absolute in the route trajectory; points before it
    have been handed to the controller. ``emergency`` freezes the gate until
    the obstacle has cleared.
    """

    trajectory: LocalTrajectory
    release_index: int = 0
    holding: tuple[str, float] | None = None
    emergency: bool = False
    stops: dict[str, StopPoint] = field(default_factory=dict)
    arrival_radius: float = DEFAULT_ARRIVAL_RADIUS
    arrival_speed: float = DEFAULT_ARRIVAL_SPEED

    def hold_emergency(self, now: float) -> None:
        if not self.emergency:
            logger.debug(f"Buffer frozen for emergency at t={now:.2f}")
        self.emergency = True

    def clear_emergency(self) -> None:
        self.emergency = False

    @property
    def holding_stop(self) -> str | None:
        """Id of the stop currently being held, if any."""
        return None if self.holding is None else self.holding[0]


def check_global_conditions(
    stop: StopPoint,
    path: GlobalPath,
    graph: MapGraph,
    current_segment: int,
    vehicle_pos: tuple[float, float],
    horizon: float,
) -> bool:
    """
    First condition set: whether a stop may enter the buffer.

    True iff the stop lies nearest to the current or the following global
    segment, is closer than ``horizon`` to the vehicle, and is still Pending.

    Args:
        stop: Stop to check
        path: Global path
        graph: Road network of the path
        current_segment: Segment the vehicle is on
        vehicle_pos: Vehicle position
        horizon: Horizon of view in meters

    Returns:
        Whether all three conditions hold
    """
    if stop.state is not StopState.PENDING:
        return False
    if distance(vehicle_pos, stop.spec.position) >= horizon:
        return False
    segment, _ = nearest_segment(path, graph, stop.spec.position)
    return segment in (current_segment, current_segment + 1)


def check_local_conditions(
    stop: StopPoint,
    traj: LocalTrajectory,
    local_distance: float = DEFAULT_LOCAL_DISTANCE,
) -> int | None:
    """
    Second condition set: where, if anywhere, the stop goes on the local plan.

    Args:
        stop: Stop to place
        traj: Clipped local trajectory
        local_distance: Maximum distance to the local path in meters

    Returns:
        Index into ``traj`` of the point nearest the stop, or None when the
        stop is too far from every local segment or falls on the last one

    Raises:
        EmptyTrajectoryError: If traj has no points
    """
    if not traj.points:
        raise EmptyTrajectoryError("Local conditions need a non-empty trajectory")

    position = stop.spec.position
    if float(np.min(polyline_distances(position, traj.xy))) >= local_distance:
        return None
    index = nearest_index(position, traj.xy)
    if traj.points[index].segment_index == traj.last_segment:
        return None
    return index


def insert_stop(
    traj: LocalTrajectory,
    stop: StopPoint,
    index: int,
    comfort: ComfortLevel,
    v_cruise: float,
    k_max: float = DEFAULT_K_MAX,
    now: float | None = None,
) -> LocalTrajectory:
    """
    Annotate a trajectory point with a stop and re-profile the speeds.

    When another stop already occupies ``index`` the stop goes on the next
    free point after it, or the nearest free one before it at the route end.

    Args:
        traj: Trajectory receiving the stop
        stop: Buffered stop
        index: Point index in ``traj``
        comfort: Comfort level for the re-profile
        v_cruise: Cruise speed for the re-profile
        k_max: Vehicle curvature limit
        now: Simulation time of dispatch

    Returns:
        New trajectory; the stop is now Dispatched

    Raises:
        StopIndexError: If index is outside traj or no point is free
        IllegalStateError: If the stop is not Buffered
    """
    if not 0 <= index < len(traj.points):
        raise StopIndexError(f"Stop index {index} outside trajectory of {len(traj)} points")
    if stop.state is not StopState.BUFFERED:
        raise IllegalStateError(
            f"Stop '{stop.id}' must be Buffered to insert, is {stop.state.value}"
        )

    points = list(traj.points)
    slot = _free_index(points, index)
    if slot is None:
        raise StopIndexError(f"No free trajectory point for stop '{stop.id}'")
    if slot != index:
        logger.debug(
            f"Stop '{stop.id}' moved from point {index} to {slot}; "
            f"'{points[index].stop[0]}' already holds it"
        )
    points[slot] = replace(
        points[slot], stop=(stop.id, stop.spec.stop_duration), target_speed=0.0
    )
    updated = profile_velocity(traj.with_points(points), comfort, v_cruise, k_max)

    stop.advance(StopState.DISPATCHED)
    stop.dispatched_at = now
    stop.route_index = traj.start_index + slot
    return updated


def _free_index(points: list[TrajectoryPoint], index: int) -> int | None:
    """First unannotated point at or after ``index``, else the nearest before it."""
    for i in range(index, len(points)):
        if points[i].stop is None:
            return i
    for i in range(index - 1, -1, -1):
        if points[i].stop is None:
            return i
    return None


def clear_stop(
    traj: LocalTrajectory,
    stop_id: str,
    comfort: ComfortLevel,
    v_cruise: float,
    k_max: float = DEFAULT_K_MAX,
) -> LocalTrajectory:
    """Remove a stop annotation and re-profile so the vehicle can depart."""
    points = [
        replace(p, stop=None) if p.stop is not None and p.stop[0] == stop_id else p
        for p in traj.points
    ]
    return profile_velocity(traj.with_points(points), comfort, v_cruise, k_max)


def _next_gate(buffer: StopBuffer) -> int | None:
    """Absolute index of the first unfinished stop in the buffer window."""
    window = buffer.trajectory
    for offset, point in enumerate(window.points):
        if point.stop is None:
            continue
        stop = buffer.stops.get(point.stop[0])
        if stop is not None and stop.state is StopState.COMPLETED:
            continue
        return window.start_index + offset
    return None


def release(buffer: StopBuffer, vehicle, now: float) -> list[TrajectoryPoint]:
    """
    Hand trajectory points to the controller.

    Points are released up to and including the next unfinished stop. Once
    the vehicle rests at that stop the hold starts; when its dwell time has
    elapsed the stop is Completed and release continues past it. A stop
    dispatched after the window had already passed it leaves
    ``release_index`` where it is, but the returned points still end at it.

    Args:
        buffer: Buffer to advance (mutated)
        vehicle: Vehicle state (``x``, ``y``, ``speed``)
        now: Simulation time in seconds

    Returns:
        Released points from the start of the buffer window onwards

    Raises:
        EmptyTrajectoryError: If the buffer window has no points
    """
    window = buffer.trajectory
    if not window.points:
        raise EmptyTrajectoryError("Cannot release from an empty trajectory")
    start = window.start_index
    end = start + len(window.points)

    if buffer.holding is not None:
        stop_id, resume_at = buffer.holding
        if now >= resume_at:
            buffer.holding = None
            stop = buffer.stops.get(stop_id)
            if stop is not None:
                stop.advance(StopState.COMPLETED)

    gate = _next_gate(buffer)
    if buffer.holding is None and gate is not None and gate < buffer.release_index:
        point = window.points[gate - start]
        gap = distance(point.position, (vehicle.x, vehicle.y))
        if gap <= buffer.arrival_radius and vehicle.speed < buffer.arrival_speed:
            stop_id, duration = point.stop
            buffer.holding = (stop_id, now + duration)
            stop = buffer.stops.get(stop_id)
            if stop is not None:
                stop.arrived_at = now
                stop.resume_at = now + duration
            logger.info(f"Holding at stop '{stop_id}' for {duration:g} s (t={now:.2f})")

    if not buffer.emergency:
        limit = end if gate is None else min(gate + 1, end)
        buffer.release_index = max(buffer.release_index, limit)

    count = min(max(buffer.release_index, start + 1), end) - start
    if gate is not None:
        # a stop dispatched behind release_index still ends what is handed over
        count = min(count, gate + 1 - start)
    return list(window.points[:count])


class StopScheduler:
    """Owns the stops of a run and evaluates them every control cycle."""

    def __init__(
        self,
        specs: tuple[StopPointSpec, ...] | list[StopPointSpec],
        path: GlobalPath,
        graph: MapGraph,
        trajectory: LocalTrajectory,
        comfort: ComfortLevel,
        v_cruise: float,
        k_max: float = DEFAULT_K_MAX,
        arrival_radius: float = DEFAULT_ARRIVAL_RADIUS,
        arrival_speed: float = DEFAULT_ARRIVAL_SPEED,
        local_distance: float = DEFAULT_LOCAL_DISTANCE,
    ):
        """
        Initialize StopScheduler.

        Args:
            specs: Stops declared by the map
            path: Global path of the run
            graph: Road network
            trajectory: Profiled route trajectory (start_index 0)
            comfort: Comfort level used when re-profiling
            v_cruise: Cruise speed used when re-profiling
            k_max: Vehicle curvature limit
            arrival_radius: Distance within which a stop counts as reached
            arrival_speed: Speed below which the vehicle counts as stopped
            local_distance: Local-condition distance threshold
        """
        self.stops = {spec.id: StopPoint(spec) for spec in specs}
        self.path = path
        self.graph = graph
        self.trajectory = trajectory
        self.comfort = comfort
        self.v_cruise = v_cruise
        self.k_max = k_max
        self.local_distance = local_distance
        self.current_segment = 0
        self.buffer = StopBuffer(
            trajectory=trajectory,
            stops=self.stops,
            arrival_radius=arrival_radius,
            arrival_speed=arrival_speed,
        )

    def _reslice(self, window: LocalTrajectory) -> LocalTrajectory:
        """Same window, read again from the (possibly updated) route trajectory."""
        first = window.start_index - self.trajectory.start_index
        return LocalTrajectory(
            points=self.trajectory.points[first : first + len(window.points)],
            horizon=window.horizon,
            start_index=window.start_index,
        )

    def schedule(
        self, window: LocalTrajectory, vehicle, horizon: float, now: float
    ) -> LocalTrajectory:
        """
        Run both condition sets and insert accepted stops.

        Args:
            window: Route trajectory clipped to the horizon
            vehicle: Vehicle state
            horizon: Horizon of view in meters
            now: Simulation time in seconds

        Returns:
            The window, refreshed when a stop was inserted
        """
        position = (vehicle.x, vehicle.y)
        self.current_segment = locate_segment(
            self.path, self.graph, position, self.current_segment
        )

        for stop in self.stops.values():
            if check_global_conditions(
                stop, self.path, self.graph, self.current_segment, position, horizon
            ):
                stop.advance(StopState.BUFFERED)

        inserted = False
        for stop in self.stops.values():
            if stop.state is not StopState.BUFFERED:
                continue
            index = check_local_conditions(stop, window, self.local_distance)
            if index is None:
                if logger.is_debug():
                    logger.debug(
                        f"Stop '{stop.id}' rejected by local conditions at t={now:.2f}"
                    )
                continue
            route_index = window.start_index + index - self.trajectory.start_index
            self.trajectory = insert_stop(
                self.trajectory,
                stop,
                route_index,
                self.comfort,
                self.v_cruise,
                self.k_max,
                now,
            )
            inserted = True

        return self._reslice(window) if inserted else window

    def release(
        self, window: LocalTrajectory, vehicle, now: float
    ) -> list[TrajectoryPoint]:
        """
        Release points through the buffer, clearing stops whose hold ended.

        Returns:
            Points the controller may track this cycle
        """
        self.buffer.trajectory = window
        before = {sid for sid, s in self.stops.items() if s.state is StopState.COMPLETED}
        released = release(self.buffer, vehicle, now)
        finished = [
            sid
            for sid, s in self.stops.items()
            if s.state is StopState.COMPLETED and sid not in before
        ]
        if not finished:
            return released

        for stop_id in finished:
            self.trajectory = clear_stop(
                self.trajectory, stop_id, self.comfort, self.v_cruise, self.k_max
            )
        window = self._reslice(window)
        self.buffer.trajectory = window
        return list(window.points[: len(released)])

    @property
    def holding_stop(self) -> str | None:
        return self.buffer.holding_stop

    def count(self, state: StopState) -> int:
        """Number of stops currently in ``state``."""
        return sum(1 for s in self.stops.values() if s.state is state)
