"""Path-tracking controller: curvature feedback law, speed loop and emergency stop.

Sign conventions: lateral error is positive when the vehicle is left of the
path; heading error is ``path heading - vehicle heading`` wrapped into
(-pi, pi]. With these, stabilizing gains have ``alpha2 < 0`` and
``alpha3 > 0``.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ctssim.core.map_model import ObstacleSpec
from ctssim.planning.local_planner import EmptyTrajectoryError, TrajectoryPoint
from ctssim.utils.geometry import nearest_index, polyline_distances, wrap_angle
from ctssim.utils.logger import get_logger
from ctssim.vehicle.kinematic import VehicleParams, VehicleState

logger = get_logger("ctssim.controller")

DEFAULT_SENSE_RANGE = 50.0
DEFAULT_CORRIDOR_HALFWIDTH = 1.0
DEFAULT_RESUME_DELAY = 1.0
DEFAULT_STEER_PREVIEW_TIME = 0.35


@dataclass(frozen=True)
class ControllerGains:
    """Gains of the curvature law and the speed loop."""

    alpha1: float = 1.0
    alpha2: float = -0.35
    alpha3: float = 1.2
    k_v: float = 0.8

    def __post_init__(self) -> None:
        for name in ("alpha1", "alpha2", "alpha3", "k_v"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"ControllerGains.{name} must be finite")
        if self.alpha1 <= 0:
            raise ValueError(f"alpha1 must be > 0, got {self.alpha1}")
        if self.k_v <= 0:
            raise ValueError(f"k_v must be > 0, got {self.k_v}")


@dataclass(frozen=True)
class ControlErrors:
    """Tracking errors against the released path."""

    lateral_error: float
    heading_error: float
    reference_curvature: float
    nearest_index: int


@dataclass(frozen=True)
class ControlCommand:
    """Actuator command for one control period."""

    curvature_cmd: float
    accel_cmd: float
    emergency: bool = False


def _positions(released: Sequence[TrajectoryPoint]) -> np.ndarray:
    return np.array([p.position for p in released], dtype=float)


def compute_errors(
    vehicle: VehicleState,
    released: Sequence[TrajectoryPoint],
    preview_distance: float = 0.0,
) -> ControlErrors:
    """
    Measure the vehicle's tracking errors.

    Args:
        vehicle: Vehicle state
        released: Points released by the stop buffer
        preview_distance: Arc length ahead of the nearest point at which the
            reference curvature is read (0 reads the nearest point)

    Returns:
        ControlErrors relative to the nearest released point

    Raises:
        EmptyTrajectoryError: If nothing has been released
    """
    if not released:
        raise EmptyTrajectoryError("No released points to track")

    index = nearest_index((vehicle.x, vehicle.y), _positions(released))
    point = released[index]
    dx, dy = vehicle.x - point.position[0], vehicle.y - point.position[1]
    lateral = math.cos(point.heading) * dy - math.sin(point.heading) * dx
    heading = wrap_angle(point.heading - vehicle.heading)

    curvature = point.curvature
    if preview_distance > 0.0:
        target = point.arc_length + preview_distance
        for ahead in released[index:]:
            curvature = ahead.curvature
            if ahead.arc_length >= target:
                break

    return ControlErrors(
        lateral_error=lateral,
        heading_error=heading,
        reference_curvature=curvature,
        nearest_index=index,
    )


def lateral_control(errors: ControlErrors, gains: ControllerGains, k_max: float) -> float:
    """
    Curvature command ``alpha1*k + alpha2*L + alpha3*H`` saturated to ``k_max``.

    Raises:
        ValueError: If k_max is not positive
    """
    if k_max <= 0:
        raise ValueError(f"k_max must be > 0, got {k_max}")
    u = (
        gains.alpha1 * errors.reference_curvature
        + gains.alpha2 * errors.lateral_error
        + gains.alpha3 * errors.heading_error
    )
    return max(-k_max, min(k_max, u))


def longitudinal_control(
    v: float, v_target: float, k_v: float, a_long_max: float, a_brake_max: float
) -> float:
    """
    Proportional speed loop.

    Returns:
        ``clamp(k_v * (v_target - v), -a_brake_max, a_long_max)``

    Raises:
        ValueError: If either limit is not positive
    """
    if a_long_max <= 0 or a_brake_max <= 0:
        raise ValueError("Acceleration limits must be positive")
    return max(-a_brake_max, min(a_long_max, k_v * (v_target - v)))


def speed_reference(
    released: Sequence[TrajectoryPoint], index: int, speed: float, k_v: float
) -> float:
    """
    Target speed one speed-loop time constant ahead of the nearest point.

    Reading the profile ``speed / k_v`` meters ahead makes the first-order
    loop come to rest on a zero-speed point instead of short of it. The
    lookahead never passes the first stop-annotated point: a stop dispatched
    after the points beyond it were released still brings the vehicle to
    rest on it. Completed stops are cleared from the trajectory, so every
    annotation seen here is a stop still to be served. Past the last released
    point the last point's target is used.

    Args:
        released: Released points
        index: Nearest released point
        speed: Current speed in m/s
        k_v: Speed-loop gain in 1/s

    Returns:
        Target speed in m/s
    """
    cap = next((p.arc_length for p in released if p.stop is not None), math.inf)
    here = released[index]
    if here.arc_length >= cap:
        return 0.0
    target = min(here.arc_length + max(speed, 0.0) / k_v, cap)
    previous = here
    for point in released[index + 1 :]:
        if point.arc_length >= target:
            span = point.arc_length - previous.arc_length
            u = (target - previous.arc_length) / span
            change = point.target_speed - previous.target_speed
            return previous.target_speed + u * change
        previous = point
    return previous.target_speed


def emergency_check(
    vehicle: VehicleState,
    released: Sequence[TrajectoryPoint],
    obstacles: Sequence[ObstacleSpec],
    now: float,
    sense_range: float = DEFAULT_SENSE_RANGE,
    corridor_halfwidth: float = DEFAULT_CORRIDOR_HALFWIDTH,
) -> bool:
    """
    Whether an active obstacle blocks the released path ahead.

    Args:
        vehicle: Vehicle state
        released: Released points
        obstacles: Obstacles of the map
        now: Simulation time in seconds
        sense_range: Arc length ahead of the vehicle to inspect in meters
        corridor_halfwidth: Half width of the swept corridor in meters

    Returns:
        True iff an active obstacle comes within ``corridor_halfwidth +
        radius`` of the path ahead

    Raises:
        ValueError: If sense_range is not positive
    """
    if sense_range <= 0:
        raise ValueError(f"sense_range must be > 0, got {sense_range}")
    active = [o for o in obstacles if o.is_active(now)]
    if not active or not released:
        return False

    xy = _positions(released)
    first = nearest_index((vehicle.x, vehicle.y), xy)
    limit = released[first].arc_length + sense_range
    last = first
    while last + 1 < len(released) and released[last + 1].arc_length <= limit:
        last += 1
    ahead = xy[first : last + 1]

    for obstacle in active:
        gap = float(np.min(polyline_distances(obstacle.position, ahead)))
        if gap <= corridor_halfwidth + obstacle.radius:
            return True
    return False


class EmergencyLatch:
    """Holds the emergency flag until the corridor has stayed clear long enough."""

    def __init__(self, resume_delay: float = DEFAULT_RESUME_DELAY):
        self.resume_delay = resume_delay
        self.engaged = False
        self._clear_since: float | None = None

    def update(self, blocked: bool, now: float) -> bool:
        """
        Feed this cycle's corridor check.

        Args:
            blocked: Result of :func:`emergency_check`
            now: Simulation time in seconds

        Returns:
            Whether the emergency stop is active
        """
        if blocked:
            if not self.engaged:
                logger.warning(f"Emergency stop engaged at t={now:.2f}")
            self.engaged = True
            self._clear_since = None
            return True
        if not self.engaged:
            return False
        if self._clear_since is None:
            self._clear_since = now
        if now - self._clear_since >= self.resume_delay - 1e-9:
            logger.info(f"Emergency stop released at t={now:.2f}")
            self.engaged = False
            self._clear_since = None
            return False
        return True


class PathTracker:
    """Combines the control laws into one command per cycle."""

    def __init__(
        self,
        gains: ControllerGains,
        params: VehicleParams,
        a_long_max: float,
        steer_preview_time: float = DEFAULT_STEER_PREVIEW_TIME,
        sense_range: float = DEFAULT_SENSE_RANGE,
        corridor_halfwidth: float = DEFAULT_CORRIDOR_HALFWIDTH,
        resume_delay: float = DEFAULT_RESUME_DELAY,
    ):
        """
        Initialize PathTracker.

        Args:
            gains: Controller gains
            params: Vehicle limits (k_max, a_brake_max)
            a_long_max: Comfort acceleration limit of the speed loop
            steer_preview_time: Curvature preview in seconds of travel
            sense_range: Obstacle sensing range in meters
            corridor_halfwidth: Corridor half width in meters
            resume_delay: Clear time before an emergency stop releases
        """
        self.gains = gains
        self.params = params
        self.a_long_max = min(a_long_max, params.a_long_max)
        self.steer_preview_time = steer_preview_time
        self.sense_range = sense_range
        self.corridor_halfwidth = corridor_halfwidth
        self.latch = EmergencyLatch(resume_delay)

    def command(
        self,
        vehicle: VehicleState,
        released: Sequence[TrajectoryPoint],
        obstacles: Sequence[ObstacleSpec],
        now: float,
    ) -> tuple[ControlCommand, ControlErrors, float]:
        """
        Compute this cycle's command.

        Returns:
            (command, tracking errors, speed reference)
        """
        preview = self.steer_preview_time * vehicle.speed
        errors = compute_errors(vehicle, released, preview)
        curvature = lateral_control(errors, self.gains, self.params.k_max)

        blocked = emergency_check(
            vehicle, released, obstacles, now, self.sense_range, self.corridor_halfwidth
        )
        if self.latch.update(blocked, now):
            return ControlCommand(curvature, -self.params.a_brake_max, True), errors, 0.0

        k_v = self.gains.k_v
        v_target = speed_reference(released, errors.nearest_index, vehicle.speed, k_v)
        accel = longitudinal_control(
            vehicle.speed, v_target, k_v, self.a_long_max, self.params.a_brake_max
        )
        return ControlCommand(curvature, accel, False), errors, v_target
