"""Run metrics: tracking accuracy in curves, stop holds and U-turn extent."""

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from ctssim.planning.local_planner import LocalTrajectory
from ctssim.planning.stop_scheduler import (
    DEFAULT_ARRIVAL_RADIUS,
    DEFAULT_ARRIVAL_SPEED,
    StopPoint,
)
from ctssim.utils.geometry import distance

if TYPE_CHECKING:
    from ctssim.core.harness import TraceRecord

CURVE_THRESHOLD = 0.01
UTURN_SAMPLE_SPACING = 0.25
UTURN_HEADING_CHANGE = math.pi - 0.2
_CHUNK = 512


class EmptyTraceError(Exception):
    """Raised when metrics are requested for a trace without records."""

    pass


@dataclass(frozen=True)
class StopMetrics:
    stop_id: str
    arrival_time: float
    hold_duration: float
    position_error: float


@dataclass
class MetricsReport:
    """Aggregated results of one run."""

    lateral_error_mean_curves: float
    lateral_error_max: float
    heading_error_min: float
    heading_error_max: float
    curvature_max: float
    route_completed: bool
    u_turn_extent: float | None = None
    stops: list[StopMetrics] = field(default_factory=list)
    lateral_error_mean: float = 0.0
    heading_error_abs_max_moving: float = 0.0
    distance_travelled: float = 0.0
    sim_time: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        """Flat mapping with stop entries ordered by arrival time."""
        data = asdict(self)
        ordered = sorted(self.stops, key=lambda s: s.arrival_time)
        data["stops"] = [asdict(s) for s in ordered]
        return data


def _curve_mask(xy: np.ndarray, traj: LocalTrajectory) -> np.ndarray:
    """Whether the trajectory point nearest each record lies on a curve."""
    if not traj.points:
        return np.zeros(len(xy), dtype=bool)
    path = traj.xy
    curved = np.abs(np.array([p.curvature for p in traj.points])) > CURVE_THRESHOLD
    mask = np.empty(len(xy), dtype=bool)
    for lo in range(0, len(xy), _CHUNK):
        chunk = xy[lo : lo + _CHUNK]
        d2 = (chunk[:, None, 0] - path[None, :, 0]) ** 2 + (
            chunk[:, None, 1] - path[None, :, 1]
        ) ** 2
        mask[lo : lo + _CHUNK] = curved[np.argmin(d2, axis=1)]
    return mask


def u_turn_extent(xy: np.ndarray, heading: np.ndarray) -> float | None:
    """
    Lateral room used by the tightest heading reversal of a driven path.

    The path is resampled every 0.25 m of travel. The shortest stretch whose
    unwrapped heading changes by at least ``pi - 0.2`` is the U-turn; its
    extent is the spread of that stretch across the initial heading.

    Args:
        xy: Driven positions, shape (n, 2)
        heading: Vehicle headings in radians, shape (n,)

    Returns:
        Extent in meters, or None if the heading never reverses
    """
    if len(xy) < 2:
        return None
    travelled = np.concatenate(([0.0], np.cumsum(np.hypot(*np.diff(xy, axis=0).T))))
    if travelled[-1] < UTURN_SAMPLE_SPACING:
        return None

    s = np.arange(0.0, travelled[-1], UTURN_SAMPLE_SPACING)
    # Drop stationary records so the interpolation abscissa increases
    keep = np.concatenate(([True], np.diff(travelled) > 0))
    x = np.interp(s, travelled[keep], xy[keep, 0])
    y = np.interp(s, travelled[keep], xy[keep, 1])
    theta = np.interp(s, travelled[keep], np.unwrap(heading)[keep])

    best: tuple[int, int] | None = None
    for i in range(len(s) - 1):
        reached = np.nonzero(np.abs(theta[i + 1 :] - theta[i]) >= UTURN_HEADING_CHANGE)[0]
        if reached.size == 0:
            continue
        j = i + 1 + int(reached[0])
        if best is None or j - i < best[1] - best[0]:
            best = (i, j)
    if best is None:
        return None

    i, j = best
    normal = np.array([-math.sin(theta[i]), math.cos(theta[i])])
    offsets = (x[i : j + 1] - x[i]) * normal[0] + (y[i : j + 1] - y[i]) * normal[1]
    return float(offsets.max() - offsets.min())


def compute_metrics(
    trace: Sequence["TraceRecord"],
    traj: LocalTrajectory,
    stops: Sequence[StopPoint] = (),
    arrival_radius: float = DEFAULT_ARRIVAL_RADIUS,
    arrival_speed: float = DEFAULT_ARRIVAL_SPEED,
) -> MetricsReport:
    """
    Aggregate a trace into a MetricsReport.

    Args:
        trace: Trace records of one run
        traj: Route trajectory the run followed
        stops: Stops of the run (for hold position errors)
        arrival_radius: Completion distance to the final trajectory point
        arrival_speed: Completion speed

    Returns:
        MetricsReport

    Raises:
        EmptyTraceError: If the trace has no records
    """
    if not trace:
        raise EmptyTraceError("Cannot compute metrics of an empty trace")

    xy = np.array([(r.x, r.y) for r in trace], dtype=float)
    lateral = np.abs(np.array([r.lateral_error for r in trace]))
    heading_error = np.array([r.heading_error for r in trace])
    curvature = np.array(
        [max(abs(r.curvature_cmd), abs(r.applied_curvature)) for r in trace]
    )
    moving = np.array([r.stop_state is None and not r.emergency for r in trace])

    curves = _curve_mask(xy, traj)
    dt = trace[1].time - trace[0].time if len(trace) > 1 else 0.0

    specs = {stop.id: stop.spec for stop in stops}
    holds: dict[str, list["TraceRecord"]] = {}
    for record in trace:
        if record.stop_state is not None:
            holds.setdefault(record.stop_state, []).append(record)
    stop_metrics = []
    for stop_id, records in holds.items():
        first = records[0]
        spec = specs.get(stop_id)
        error = distance((first.x, first.y), spec.position) if spec else 0.0
        stop_metrics.append(StopMetrics(stop_id, first.time, len(records) * dt, error))
    stop_metrics.sort(key=lambda s: s.arrival_time)

    last = trace[-1]
    completed = bool(traj.points) and (
        distance((last.x, last.y), traj.points[-1].position) <= arrival_radius
        and last.speed < arrival_speed
    )

    return MetricsReport(
        lateral_error_mean_curves=float(lateral[curves].mean()) if curves.any() else 0.0,
        lateral_error_max=float(lateral.max()),
        heading_error_min=float(heading_error.min()),
        heading_error_max=float(heading_error.max()),
        curvature_max=float(curvature.max()),
        route_completed=completed,
        u_turn_extent=u_turn_extent(xy, np.array([r.heading for r in trace])),
        stops=stop_metrics,
        lateral_error_mean=float(lateral.mean()),
        heading_error_abs_max_moving=(
            float(np.abs(heading_error[moving]).max()) if moving.any() else 0.0
        ),
        distance_travelled=float(np.sum(np.hypot(*np.diff(xy, axis=0).T))),
        sim_time=float(last.time),
    )
