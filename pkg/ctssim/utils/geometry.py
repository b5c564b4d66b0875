"""Planar geometry helpers shared by the planners, controller and metrics."""

import math

import numpy as np

Point = tuple[float, float]


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians into (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points."""
    return math.hypot(b[0] - a[0], b[1] - a[1])


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    """
    Distance from ``p`` to the closed segment ``a``-``b``.

    Args:
        p: Query point
        a: Segment start
        b: Segment end

    Returns:
        Shortest distance in meters
    """
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return distance(p, a)
    u = ((p[0] - ax) * dx + (p[1] - ay) * dy) / length_sq
    u = min(1.0, max(0.0, u))
    return math.hypot(p[0] - (ax + u * dx), p[1] - (ay + u * dy))


def polyline_distances(p: Point, xy: np.ndarray) -> np.ndarray:
    """
    Distances from ``p`` to every segment of the polyline ``xy`` (shape (n, 2)).

    A single-vertex polyline yields the point distance as its only entry.
    """
    if len(xy) == 1:
        return np.array([math.hypot(p[0] - xy[0, 0], p[1] - xy[0, 1])])
    a = xy[:-1]
    d = xy[1:] - a
    length_sq = np.einsum("ij,ij->i", d, d)
    rel = np.asarray(p, dtype=float) - a
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(length_sq > 0.0, np.einsum("ij,ij->i", rel, d) / length_sq, 0.0)
    u = np.clip(u, 0.0, 1.0)
    closest = a + d * u[:, None]
    return np.hypot(p[0] - closest[:, 0], p[1] - closest[:, 1])


def nearest_index(p: Point, xy: np.ndarray) -> int:
    """Index of the vertex of ``xy`` nearest to ``p`` (ties: smallest index)."""
    d2 = (xy[:, 0] - p[0]) ** 2 + (xy[:, 1] - p[1]) ** 2
    return int(np.argmin(d2))
