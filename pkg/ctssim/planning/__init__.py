"""Global route planning, local trajectory generation and stop scheduling."""

from ctssim.planning.global_planner import GlobalPath, NoRouteError, plan_route
from ctssim.planning.local_planner import (
    Bezier,
    ComfortLevel,
    LocalPlanner,
    LocalTrajectory,
    SegmentPrimitive,
    Straight,
    TrajectoryPoint,
    bezier_curvature,
    bezier_point,
    build_geometry,
    clip_to_horizon,
    profile_velocity,
    sample_trajectory,
)
from ctssim.planning.stop_scheduler import (
    StopBuffer,
    StopPoint,
    StopScheduler,
    StopState,
    check_global_conditions,
    check_local_conditions,
    insert_stop,
    release,
)

__all__ = [
    "Bezier",
    "ComfortLevel",
    "GlobalPath",
    "LocalPlanner",
    "LocalTrajectory",
    "NoRouteError",
    "SegmentPrimitive",
    "StopBuffer",
    "StopPoint",
    "StopScheduler",
    "StopState",
    "Straight",
    "TrajectoryPoint",
    "bezier_curvature",
    "bezier_point",
    "build_geometry",
    "check_global_conditions",
    "check_local_conditions",
    "clip_to_horizon",
    "insert_stop",
    "plan_route",
    "profile_velocity",
    "release",
    "sample_trajectory",
]
