"""Kinematic unicycle plant with curvature input and actuator limits."""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from ctssim.utils.geometry import wrap_angle

if TYPE_CHECKING:
    from ctssim.control.controller import ControlCommand

STRAIGHT_CURVATURE = 1e-9
MAX_TIMESTEP = 1.0


class InvalidTimestepError(Exception):
    """Raised for a non-positive or overly long integration step."""

    pass


@dataclass(frozen=True)
class VehicleState:
    """Pose, speed and clock of the simulated vehicle."""

    x: float
    y: float
    heading: float
    speed: float = 0.0
    time: float = 0.0
    applied_curvature: float = 0.0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class VehicleParams:
    """Actuator limits of the plant."""

    k_max: float = 0.48
    v_max: float = 3.0
    a_long_max: float = 1.5
    a_brake_max: float = 3.0
    curvature_rate_max: float = 0.6

    def __post_init__(self) -> None:
        for name in ("k_max", "v_max", "a_long_max", "a_brake_max", "curvature_rate_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"VehicleParams.{name} must be positive, got {value}")


def _clamp(value: float, low: float, high: float) -> float:
    return max(low, min(high, value))


def _travel(speed: float, accel: float, dt: float, v_max: float) -> tuple[float, float]:
    """Speed after ``dt`` and distance covered, honouring the 0 and v_max bounds."""
    v_new = speed + accel * dt
    if v_new < 0.0:
        return 0.0, speed * speed / (2.0 * -accel)
    if v_new > v_max:
        if accel <= 0.0:
            # Started above v_max (e.g. a lowered limit)
            return v_max, 0.5 * (speed + v_max) * dt
        t_cap = (v_max - speed) / accel
        return v_max, speed * t_cap + 0.5 * accel * t_cap * t_cap + v_max * (dt - t_cap)
    return v_new, 0.5 * (speed + v_new) * dt


def step(
    state: VehicleState, cmd: "ControlCommand", params: VehicleParams, dt: float
) -> VehicleState:
    """
    Advance the plant by one step.

    The applied curvature slews toward the command at no more than
    ``curvature_rate_max`` and is then held for the whole step. Speed follows
    the clamped acceleration. The pose moves along the exact circular arc of
    the covered distance (a straight line for near-zero curvature), so
    constant commands give step-size independent results.

    Args:
        state: Current state
        cmd: Control command (``curvature_cmd``, ``accel_cmd``)
        params: Actuator limits
        dt: Step in seconds, ``0 < dt <= 1``

    Returns:
        State at ``state.time + dt``

    Raises:
        InvalidTimestepError: If dt is out of range
    """
    if not (0.0 < dt <= MAX_TIMESTEP):
        raise InvalidTimestepError(f"dt must be in (0, {MAX_TIMESTEP}], got {dt}")

    k_target = _clamp(cmd.curvature_cmd, -params.k_max, params.k_max)
    max_change = params.curvature_rate_max * dt
    k = state.applied_curvature + _clamp(
        k_target - state.applied_curvature, -max_change, max_change
    )
    k = _clamp(k, -params.k_max, params.k_max)

    accel = _clamp(cmd.accel_cmd, -params.a_brake_max, params.a_long_max)
    speed, ds = _travel(max(state.speed, 0.0), accel, dt, params.v_max)

    theta = state.heading
    if abs(k) > STRAIGHT_CURVATURE:
        theta_new = theta + k * ds
        x = state.x + (math.sin(theta_new) - math.sin(theta)) / k
        y = state.y + (math.cos(theta) - math.cos(theta_new)) / k
    else:
        theta_new = theta
        x = state.x + ds * math.cos(theta)
        y = state.y + ds * math.sin(theta)

    return VehicleState(
        x=x,
        y=y,
        heading=wrap_angle(theta_new),
        speed=speed,
        time=state.time + dt,
        applied_curvature=k,
    )
