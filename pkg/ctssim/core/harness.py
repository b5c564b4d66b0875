"""Closed-loop simulation: plan, clip, schedule stops, control and step the plant."""

import math
from dataclasses import dataclass

from ctssim.control.controller import PathTracker
from ctssim.core.metrics import MetricsReport, compute_metrics
from ctssim.core.scenario import Scenario
from ctssim.planning.global_planner import GlobalPath, plan_route
from ctssim.planning.local_planner import (
    LocalPlanner,
    LocalTrajectory,
    SegmentPrimitive,
    clip_to_horizon,
)
from ctssim.planning.stop_scheduler import StopPoint, StopScheduler, StopState
from ctssim.utils.geometry import distance
from ctssim.utils.logger import get_logger, set_sim_time
from ctssim.vehicle.kinematic import VehicleState, step

logger = get_logger("ctssim.harness")


@dataclass(frozen=True)
class TraceRecord:
    """State of the loop at one control period."""

    time: float
    x: float
    y: float
    heading: float
    speed: float
    target_speed: float
    lateral_error: float
    heading_error: float
    curvature_cmd: float
    applied_curvature: float
    stop_state: str | None = None
    emergency: bool = False


@dataclass(frozen=True)
class SimulationResult:
    trace: list[TraceRecord]
    metrics: MetricsReport
    trajectory: LocalTrajectory
    path: GlobalPath
    primitives: list[SegmentPrimitive]
    stops: list[StopPoint]


class Simulation:
    """Runs one scenario as a fixed-timestep, single-threaded loop."""

    def __init__(self, scenario: Scenario):
        """
        Initialize Simulation.

        Args:
            scenario: Scenario to run
        """
        self.scenario = scenario
        self.planner = LocalPlanner(
            corner_offset=scenario.planner.corner_offset,
            sample_spacing=scenario.planner.sample_spacing,
            max_segment_length=scenario.planner.max_segment_length,
            k_max=scenario.params.k_max,
        )
        self.tracker = PathTracker(
            gains=scenario.gains,
            params=scenario.params,
            a_long_max=scenario.comfort.a_long_max,
            steer_preview_time=scenario.steer_preview_time,
            sense_range=scenario.emergency.sense_range,
            corridor_halfwidth=scenario.emergency.corridor_halfwidth,
            resume_delay=scenario.emergency.resume_delay,
        )

    def plan(self) -> tuple[GlobalPath, list[SegmentPrimitive], LocalTrajectory]:
        """
        Plan the global route and the profiled route trajectory.

        Raises:
            NoRouteError: If the goal is unreachable
        """
        scenario = self.scenario
        path = plan_route(scenario.map, scenario.start, scenario.goal)
        primitives, trajectory = self.planner.plan(
            path, scenario.map, scenario.comfort, scenario.v_cruise
        )
        return path, primitives, trajectory

    def _initial_state(self, trajectory: LocalTrajectory) -> VehicleState:
        scenario = self.scenario
        heading = scenario.initial_heading
        if heading is None:
            heading = trajectory.points[0].heading if trajectory.points else 0.0
        return VehicleState(
            x=scenario.start[0],
            y=scenario.start[1],
            heading=heading,
            speed=scenario.initial_speed,
        )

    def run(self) -> SimulationResult:
        """
        Execute the loop until the route end is reached or time runs out.

        Every period runs, in order: horizon clipping, global stop
        conditions, local stop conditions and insertion, buffer release,
        error computation, control and the plant step. One TraceRecord is
        emitted per period.

        Returns:
            SimulationResult with trace and metrics

        Raises:
            NoRouteError: If the goal is unreachable
        """
        scenario = self.scenario
        path, primitives, trajectory = self.plan()
        state = self._initial_state(trajectory)
        scheduler = StopScheduler(
            scenario.document.stops,
            path,
            scenario.map,
            trajectory,
            scenario.comfort,
            scenario.v_cruise,
            k_max=scenario.params.k_max,
            arrival_radius=scenario.stops.arrival_radius,
            arrival_speed=scenario.stops.arrival_speed,
            local_distance=scenario.stops.local_distance,
        )
        obstacles = scenario.document.obstacles
        dt = scenario.dt
        steps = math.floor(scenario.max_sim_time / dt + 1e-9)
        trace: list[TraceRecord] = []
        completed = False

        if not trajectory.points:
            logger.warning("Start and goal share a node; nothing to drive")
            trace.append(
                TraceRecord(
                    time=0.0,
                    x=state.x,
                    y=state.y,
                    heading=state.heading,
                    speed=state.speed,
                    target_speed=0.0,
                    lateral_error=0.0,
                    heading_error=0.0,
                    curvature_cmd=0.0,
                    applied_curvature=state.applied_curvature,
                )
            )
            steps = -1

        search_from = 0
        try:
            for k in range(steps + 1):
                now = k * dt
                set_sim_time(now)
                window = clip_to_horizon(
                    scheduler.trajectory, state, scenario.horizon, search_from
                )
                search_from = window.start_index
                window = scheduler.schedule(window, state, scenario.horizon, now)

                if self.tracker.latch.engaged:
                    scheduler.buffer.hold_emergency(now)
                else:
                    scheduler.buffer.clear_emergency()
                released = scheduler.release(window, state, now)

                cmd, errors, v_target = self.tracker.command(
                    state, released, obstacles, now
                )
                trace.append(
                    TraceRecord(
                        time=now,
                        x=state.x,
                        y=state.y,
                        heading=state.heading,
                        speed=state.speed,
                        target_speed=v_target,
                        lateral_error=errors.lateral_error,
                        heading_error=errors.heading_error,
                        curvature_cmd=cmd.curvature_cmd,
                        applied_curvature=state.applied_curvature,
                        stop_state=scheduler.holding_stop,
                        emergency=cmd.emergency,
                    )
                )

                final = scheduler.trajectory.points[-1].position
                if (
                    distance(state.position, final) <= scenario.stops.arrival_radius
                    and state.speed < scenario.stops.arrival_speed
                    and scheduler.holding_stop is None
                ):
                    completed = True
                    break

                state = step(state, cmd, scenario.params, dt)
        finally:
            set_sim_time(None)

        if completed:
            logger.info(f"Route completed at t={trace[-1].time:.2f} s")
        elif trajectory.points:
            logger.warning(f"Route not completed within {scenario.max_sim_time:g} s")

        stops = list(scheduler.stops.values())
        accepted = sum(
            1 for s in stops if s.state in (StopState.DISPATCHED, StopState.COMPLETED)
        )
        done = scheduler.count(StopState.COMPLETED)
        if completed and accepted != done:
            logger.warning(f"{accepted} stops accepted but {done} completed")

        metrics = compute_metrics(
            trace,
            trajectory,
            stops,
            arrival_radius=scenario.stops.arrival_radius,
            arrival_speed=scenario.stops.arrival_speed,
        )
        metrics.route_completed = completed
        return SimulationResult(trace, metrics, trajectory, path, primitives, stops)


def run(scenario: Scenario) -> tuple[list[TraceRecord], MetricsReport]:
    """
    Run a scenario.

    Args:
        scenario: Scenario to run

    Returns:
        (trace, metrics)

    Raises:
        NoRouteError: If the goal is unreachable
    """
    result = Simulation(scenario).run()
    return result.trace, result.metrics
