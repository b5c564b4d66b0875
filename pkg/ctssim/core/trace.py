"""Trace and metrics output: CSV, SVG report and JSON."""

import csv
import json
from collections.abc import Sequence
from dataclasses import astuple, fields
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from ctssim.core.harness import TraceRecord  # noqa: E402
from ctssim.core.metrics import MetricsReport  # noqa: E402
from ctssim.planning.local_planner import LocalTrajectory  # noqa: E402
from ctssim.utils.logger import get_logger  # noqa: E402

logger = get_logger("ctssim.trace")

TRACE_FIELDS = tuple(f.name for f in fields(TraceRecord))
TRACE_FORMATS = ("csv", "svg")
SVG_HASH_SALT = "ctssim"


class TraceIOError(Exception):
    """Raised when a trace or report cannot be written or read."""

    pass


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    return f"{value:.9g}"


def write_trace_csv(trace: Sequence[TraceRecord], path: str | Path) -> None:
    """
    Write a trace as CSV.

    One header line, then one line per record with fields in TraceRecord
    order. Numbers use 9 significant digits; ``stop_state`` is empty when no
    stop is held and ``emergency`` is 0 or 1.

    Raises:
        TraceIOError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_FIELDS)
            for record in trace:
                writer.writerow([_format(v) for v in astuple(record)])
    except OSError as e:
        raise TraceIOError(f"Failed to write trace {path}: {e}") from e
    logger.info(f"Wrote {len(trace)} trace records to {path}")


def parse_trace_csv(path: str | Path) -> list[TraceRecord]:
    """
    Read a CSV trace written by :func:`write_trace_csv`.

    Raises:
        TraceIOError: If the file cannot be read or has unexpected columns
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise TraceIOError(f"Failed to read trace {path}: {e}") from e

    if not rows or tuple(rows[0]) != TRACE_FIELDS:
        raise TraceIOError(f"{path} is not a trace file (unexpected header)")

    records = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(TRACE_FIELDS):
            raise TraceIOError(f"{path}:{line_no}: expected {len(TRACE_FIELDS)} columns")
        try:
            numbers = [float(v) for v in row[:10]]
        except ValueError as e:
            raise TraceIOError(f"{path}:{line_no}: {e}") from e
        records.append(TraceRecord(*numbers, row[10] or None, row[11] == "1"))
    return records


def write_trace_svg(
    trace: Sequence[TraceRecord],
    path: str | Path,
    trajectory: LocalTrajectory | None = None,
) -> None:
    """
    Render the trace as an SVG report.

    Panels: driven x-y path (over the planned trajectory when given), speed
    against target, lateral error, heading error and curvature.

    Raises:
        TraceIOError: If the file cannot be written
    """
    path = Path(path)
    t = [r.time for r in trace]

    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig = plt.figure(figsize=(10, 12))
        grid = fig.add_gridspec(4, 2)
        ax_path = fig.add_subplot(grid[:2, :])
        ax_speed = fig.add_subplot(grid[2, 0])
        ax_lat = fig.add_subplot(grid[2, 1])
        ax_head = fig.add_subplot(grid[3, 0])
        ax_curv = fig.add_subplot(grid[3, 1])

        if trajectory is not None and trajectory.points:
            planned = trajectory.xy
            ax_path.plot(planned[:, 0], planned[:, 1], color="0.7", lw=3, label="planned")
        ax_path.plot([r.x for r in trace], [r.y for r in trace], label="driven")
        ax_path.set_aspect("equal", adjustable="datalim")
        ax_path.set_xlabel("x [m]")
        ax_path.set_ylabel("y [m]")
        ax_path.legend(loc="best")

        ax_speed.plot(t, [r.speed for r in trace], label="speed")
        ax_speed.plot(t, [r.target_speed for r in trace], ls="--", label="target")
        ax_speed.set_ylabel("speed [m/s]")
        ax_speed.legend(loc="best")

        ax_lat.plot(t, [r.lateral_error for r in trace])
        ax_lat.set_ylabel("lateral error [m]")

        ax_head.plot(t, [r.heading_error for r in trace])
        ax_head.set_ylabel("heading error [rad]")
        ax_head.set_xlabel("time [s]")

        ax_curv.plot(t, [r.curvature_cmd for r in trace], label="command")
        ax_curv.plot(t, [r.applied_curvature for r in trace], label="applied")
        ax_curv.set_ylabel("curvature [1/m]")
        ax_curv.set_xlabel("time [s]")
        ax_curv.legend(loc="best")

        fig.tight_layout()
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise TraceIOError(f"Failed to write plot {path}: {e}") from e
        finally:
            plt.close(fig)
    logger.info(f"Wrote trace plot to {path}")


def emit_trace(
    trace: Sequence[TraceRecord],
    path: str | Path,
    fmt: str = "csv",
    trajectory: LocalTrajectory | None = None,
) -> None:
    """
    Write a trace in the requested format.

    Args:
        trace: Trace records
        path: Destination file
        fmt: ``csv`` or ``svg``
        trajectory: Planned trajectory drawn under the SVG path panel

    Raises:
        ValueError: If the format is unknown
        TraceIOError: If the file cannot be written
    """
    if fmt == "csv":
        write_trace_csv(trace, path)
    elif fmt == "svg":
        write_trace_svg(trace, path, trajectory)
    else:
        raise ValueError(f"Unknown trace format '{fmt}', expected one of {TRACE_FORMATS}")


def write_metrics_json(report: MetricsReport, path: str | Path) -> None:
    """
    Write a metrics report as a flat JSON object.

    Raises:
        TraceIOError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write("\n")
    except OSError as e:
        raise TraceIOError(f"Failed to write metrics {path}: {e}") from e
    logger.info(f"Wrote metrics to {path}")
