"""Tests for stop condition checks, insertion, the release buffer and the scheduler."""

import pytest

from ctssim.core.map_model import StopPointSpec, parse_map
from ctssim.planning.global_planner import plan_route
from ctssim.planning.local_planner import EmptyTrajectoryError, LocalTrajectory, clip_to_horizon
from ctssim.planning.stop_scheduler import (
    IllegalStateError,
    StopBuffer,
    StopIndexError,
    StopPoint,
    StopScheduler,
    StopState,
    check_global_conditions,
    check_local_conditions,
    clear_stop,
    insert_stop,
    release,
)
from ctssim.vehicle.kinematic import VehicleState


def _stop(stop_id="s1", x=10.0, y=0.0, duration=10.0, state=StopState.PENDING):
    return StopPoint(StopPointSpec(stop_id, (x, y), duration), state=state)


def _at(x, y=0.0, speed=0.0):
    return VehicleState(x, y, 0.0, speed)


@pytest.fixture
def three_leg_route():
    """A(0,0) -> B(20,0) -> C(20,20) -> D(40,20)."""
    graph = parse_map(
        "node A 0 0 station\nnode B 20 0 intersection\n"
        "node C 20 20 intersection\nnode D 40 20 station\n"
        "edge A B 20 3\nedge B C 20 3\nedge C D 20 3\n"
    ).graph
    return graph, plan_route(graph, (0, 0), (40, 20))


@pytest.fixture
def window(straight_trajectory):
    """Straight trajectory clipped at the origin with a 50 m horizon."""
    return clip_to_horizon(straight_trajectory, _at(0.0), 50.0)


# ---------------------------------------------------------------------------
# Lifecycle
# ---------------------------------------------------------------------------


def test_lifecycle_in_order():
    stop = _stop()

    for state in (StopState.BUFFERED, StopState.DISPATCHED, StopState.COMPLETED):
        stop.advance(state)
        assert stop.state is state


@pytest.mark.parametrize(
    "current,target",
    [
        (StopState.PENDING, StopState.DISPATCHED),
        (StopState.PENDING, StopState.COMPLETED),
        (StopState.BUFFERED, StopState.PENDING),
        (StopState.DISPATCHED, StopState.BUFFERED),
        (StopState.COMPLETED, StopState.PENDING),
        (StopState.COMPLETED, StopState.COMPLETED),
    ],
)
def test_illegal_transitions(current, target):
    stop = _stop(state=current)

    with pytest.raises(IllegalStateError):
        stop.advance(target)
    assert stop.state is current


# ---------------------------------------------------------------------------
# Global conditions
# ---------------------------------------------------------------------------


def test_global_conditions_accept_stop_ahead(three_leg_route):
    graph, path = three_leg_route

    assert check_global_conditions(_stop(x=10.0), path, graph, 0, (0.0, 0.0), 50.0)


def test_global_conditions_need_pending(three_leg_route):
    graph, path = three_leg_route

    for state in (StopState.BUFFERED, StopState.DISPATCHED, StopState.COMPLETED):
        stop = _stop(x=10.0, state=state)
        assert not check_global_conditions(stop, path, graph, 0, (0.0, 0.0), 50.0)


def test_global_conditions_segment_window(three_leg_route):
    graph, path = three_leg_route
    stop = _stop(x=30.0, y=20.0)

    # Two segments ahead is too early even within the horizon
    assert not check_global_conditions(stop, path, graph, 0, (15.0, 0.0), 50.0)
    assert check_global_conditions(stop, path, graph, 1, (15.0, 0.0), 50.0)
    assert check_global_conditions(stop, path, graph, 2, (25.0, 20.0), 50.0)


def test_global_conditions_horizon(straight_route):
    graph, path = straight_route
    stop = _stop(x=60.0)

    assert not check_global_conditions(stop, path, graph, 0, (0.0, 0.0), 50.0)
    assert not check_global_conditions(stop, path, graph, 0, (10.0, 0.0), 50.0)
    assert check_global_conditions(stop, path, graph, 0, (15.0, 0.0), 50.0)


# ---------------------------------------------------------------------------
# Local conditions
# ---------------------------------------------------------------------------


def test_local_conditions_place_nearby_stop(window):
    assert window.last_segment == 2

    assert check_local_conditions(_stop(x=10.0, y=0.3), window) == 40


def test_local_conditions_reject_far_stop(window):
    assert check_local_conditions(_stop(x=10.0, y=6.0), window) is None
    assert check_local_conditions(_stop(x=10.0, y=4.9), window) == 40


def test_local_conditions_wait_for_next_segment(straight_trajectory, window):
    stop = _stop(x=45.0)

    assert check_local_conditions(stop, window) is None

    ahead = clip_to_horizon(straight_trajectory, _at(20.0), 50.0)
    assert ahead.last_segment == 3
    assert check_local_conditions(stop, ahead) == 100


def test_local_conditions_empty():
    with pytest.raises(EmptyTrajectoryError):
        check_local_conditions(_stop(), LocalTrajectory((), 0.0))


# ---------------------------------------------------------------------------
# Insertion
# ---------------------------------------------------------------------------


def test_insert_stop(window, normal_comfort):
    stop = _stop(state=StopState.BUFFERED)

    updated = insert_stop(window, stop, 40, normal_comfort, 3.0, now=1.5)

    assert updated.points[40].stop == ("s1", 10.0)
    assert updated.points[40].target_speed == 0.0
    assert updated.points[39].target_speed == pytest.approx(0.5**0.5)
    assert updated.points[0].target_speed == pytest.approx(3.0)
    assert window.points[40].stop is None
    assert stop.state is StopState.DISPATCHED
    assert stop.dispatched_at == 1.5
    assert stop.route_index == 40


def test_insert_stop_twice(window, normal_comfort):
    stop = _stop(state=StopState.BUFFERED)
    insert_stop(window, stop, 40, normal_comfort, 3.0)

    with pytest.raises(IllegalStateError):
        insert_stop(window, stop, 40, normal_comfort, 3.0)


def test_insert_stop_needs_buffered(window, normal_comfort):
    with pytest.raises(IllegalStateError):
        insert_stop(window, _stop(), 40, normal_comfort, 3.0)


@pytest.mark.parametrize("index", [-1, 201, 10_000])
def test_insert_stop_index(window, normal_comfort, index):
    stop = _stop(state=StopState.BUFFERED)

    with pytest.raises(StopIndexError):
        insert_stop(window, stop, index, normal_comfort, 3.0)
    with pytest.raises(IndexError):
        insert_stop(window, stop, index, normal_comfort, 3.0)
    assert stop.state is StopState.BUFFERED


def test_insert_stop_on_occupied_point(window, normal_comfort):
    first = _stop(state=StopState.BUFFERED)
    second = _stop("s2", x=10.05, duration=3.0, state=StopState.BUFFERED)
    with_first = insert_stop(window, first, 40, normal_comfort, 3.0)

    updated = insert_stop(with_first, second, 40, normal_comfort, 3.0)

    assert updated.points[40].stop == ("s1", 10.0)
    assert updated.points[41].stop == ("s2", 3.0)
    assert updated.points[41].target_speed == 0.0
    assert first.route_index == 40
    assert second.route_index == 41
    assert second.state is StopState.DISPATCHED


def test_insert_stop_on_occupied_last_point(window, normal_comfort):
    first = _stop(x=50.0, state=StopState.BUFFERED)
    second = _stop("s2", x=50.0, state=StopState.BUFFERED)
    with_first = insert_stop(window, first, 200, normal_comfort, 3.0)

    updated = insert_stop(with_first, second, 200, normal_comfort, 3.0)

    assert updated.points[200].stop == ("s1", 10.0)
    assert updated.points[199].stop == ("s2", 10.0)
    assert second.route_index == 199


def test_clear_stop(window, normal_comfort):
    stop = _stop(state=StopState.BUFFERED)
    with_stop = insert_stop(window, stop, 40, normal_comfort, 3.0)

    cleared = clear_stop(with_stop, "s1", normal_comfort, 3.0)

    assert all(p.stop is None for p in cleared.points)
    assert cleared.points[40].target_speed == pytest.approx(3.0)


# ---------------------------------------------------------------------------
# Release buffer
# ---------------------------------------------------------------------------


def test_release_without_stops(window):
    buffer = StopBuffer(trajectory=window)

    released = release(buffer, _at(0.0, speed=1.0), 0.0)

    assert released == list(window.points)
    assert buffer.release_index == len(window.points)
    assert buffer.holding is None


def test_release_holds_at_stop(window, normal_comfort):
    stop = _stop(state=StopState.BUFFERED)
    annotated = insert_stop(window, stop, 40, normal_comfort, 3.0)
    buffer = StopBuffer(trajectory=annotated, stops={"s1": stop})

    released = release(buffer, _at(0.0, speed=2.0), 0.0)
    assert len(released) == 41
    assert released[-1].stop == ("s1", 10.0)
    assert buffer.holding is None

    # Still rolling at the stop: no hold yet
    release(buffer, _at(10.0, speed=0.3), 4.0)
    assert buffer.holding is None

    released = release(buffer, _at(10.2, speed=0.0), 5.0)
    assert buffer.holding == ("s1", 15.0)
    assert buffer.holding_stop == "s1"
    assert stop.arrived_at == 5.0
    assert stop.resume_at == 15.0
    assert len(released) == 41

    release(buffer, _at(10.2, speed=0.0), 14.99)
    assert stop.state is StopState.DISPATCHED
    assert buffer.holding is not None

    released = release(buffer, _at(10.2, speed=0.0), 15.0)
    assert stop.state is StopState.COMPLETED
    assert buffer.holding is None
    assert len(released) == len(annotated.points)


def test_release_zero_duration_stop(window, normal_comfort):
    stop = _stop(duration=0.0, state=StopState.BUFFERED)
    buffer = StopBuffer(
        trajectory=insert_stop(window, stop, 40, normal_comfort, 3.0), stops={"s1": stop}
    )
    release(buffer, _at(0.0, speed=2.0), 0.0)

    release(buffer, _at(10.0), 3.0)
    assert buffer.holding == ("s1", 3.0)

    released = release(buffer, _at(10.0), 3.02)
    assert stop.state is StopState.COMPLETED
    assert len(released) == len(window.points)


def test_release_ends_at_stop_behind_release_index(window, normal_comfort):
    stop = _stop(state=StopState.BUFFERED)
    buffer = StopBuffer(trajectory=window, stops={"s1": stop})
    release(buffer, _at(0.0, speed=2.0), 0.0)
    assert buffer.release_index == 201

    buffer.trajectory = insert_stop(window, stop, 40, normal_comfort, 3.0)
    released = release(buffer, _at(5.0, speed=2.0), 2.0)

    assert buffer.release_index == 201
    assert len(released) == 41
    assert released[-1].stop == ("s1", 10.0)

    release(buffer, _at(10.1, speed=0.0), 6.0)
    assert buffer.holding == ("s1", 16.0)


def test_release_emergency_freezes_gate(straight_trajectory, window):
    buffer = StopBuffer(trajectory=window)
    buffer.hold_emergency(0.0)

    released = release(buffer, _at(0.0), 0.0)
    assert len(released) == 1
    assert buffer.release_index == 0

    buffer.clear_emergency()
    release(buffer, _at(0.0), 0.1)
    assert buffer.release_index == len(window.points)

    buffer.hold_emergency(0.2)
    buffer.trajectory = clip_to_horizon(straight_trajectory, _at(20.0), 50.0)
    released = release(buffer, _at(20.0), 0.2)
    assert buffer.release_index == 201
    assert len(released) == 201 - 80
    assert released[-1].position == pytest.approx((50.0, 0.0))


def test_release_index_is_monotone(straight_trajectory):
    buffer = StopBuffer(trajectory=clip_to_horizon(straight_trajectory, _at(0.0), 50.0))
    previous = 0
    for x in (0.0, 5.0, 12.5, 30.0, 60.0, 90.0):
        buffer.trajectory = clip_to_horizon(
            straight_trajectory, _at(x), 50.0, search_from=buffer.trajectory.start_index
        )
        release(buffer, _at(x), x)
        assert buffer.release_index >= previous
        previous = buffer.release_index


def test_release_empty_window():
    with pytest.raises(EmptyTrajectoryError):
        release(StopBuffer(trajectory=LocalTrajectory((), 50.0)), _at(0.0), 0.0)


# ---------------------------------------------------------------------------
# Scheduler
# ---------------------------------------------------------------------------


@pytest.fixture
def scheduler(straight_route, straight_trajectory, normal_comfort):
    graph, path = straight_route
    specs = [StopPointSpec("s1", (25.0, 0.0), 5.0)]
    return StopScheduler(specs, path, graph, straight_trajectory, normal_comfort, 3.0)


def test_scheduler_stop_cycle(scheduler):
    vehicle = _at(0.0)
    window = clip_to_horizon(scheduler.trajectory, vehicle, 50.0)

    window = scheduler.schedule(window, vehicle, 50.0, 0.0)
    assert scheduler.count(StopState.DISPATCHED) == 1
    assert window.points[100].stop == ("s1", 5.0)
    assert scheduler.trajectory.points[100].stop == ("s1", 5.0)
    assert scheduler.stops["s1"].route_index == 100

    released = scheduler.release(window, vehicle, 0.0)
    assert len(released) == 101
    assert released[-1].position == pytest.approx((25.0, 0.0))

    vehicle = _at(25.0)
    window = clip_to_horizon(scheduler.trajectory, vehicle, 50.0, search_from=window.start_index)
    window = scheduler.schedule(window, vehicle, 50.0, 10.0)
    released = scheduler.release(window, vehicle, 10.0)
    assert scheduler.holding_stop == "s1"
    assert len(released) == 1

    released = scheduler.release(window, vehicle, 15.0)
    assert scheduler.holding_stop is None
    assert scheduler.count(StopState.COMPLETED) == 1
    assert all(p.stop is None for p in scheduler.trajectory.points)
    assert scheduler.trajectory.points[100].target_speed > 0.0
    assert released[0].target_speed > 0.0
    assert len(released) == len(window.points)


def test_scheduler_keeps_unplaceable_stop_buffered(
    straight_route, straight_trajectory, normal_comfort
):
    graph, path = straight_route
    specs = [StopPointSpec("off-road", (25.0, 8.0), 5.0)]
    scheduler = StopScheduler(specs, path, graph, straight_trajectory, normal_comfort, 3.0)
    vehicle = _at(0.0)
    window = clip_to_horizon(straight_trajectory, vehicle, 50.0)

    assert scheduler.schedule(window, vehicle, 50.0, 0.0) is window
    assert scheduler.count(StopState.BUFFERED) == 1
    assert scheduler.count(StopState.DISPATCHED) == 0


def test_scheduler_waits_for_horizon(straight_route, straight_trajectory, normal_comfort):
    graph, path = straight_route
    specs = [StopPointSpec("far", (80.0, 0.0), 5.0)]
    scheduler = StopScheduler(specs, path, graph, straight_trajectory, normal_comfort, 3.0)

    for x in (0.0, 20.0):
        vehicle = _at(x)
        scheduler.schedule(clip_to_horizon(straight_trajectory, vehicle, 50.0), vehicle, 50.0, x)
        assert scheduler.count(StopState.PENDING) == 1

    vehicle = _at(40.0)
    scheduler.schedule(clip_to_horizon(straight_trajectory, vehicle, 50.0), vehicle, 50.0, 40.0)
    assert scheduler.count(StopState.DISPATCHED) == 1
