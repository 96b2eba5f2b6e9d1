"""Planar geometry primitives: points, segments, trajectories, rectangles.

Coordinates are planar Euclidean in the dataset's native units; all
predicates use closed boundaries (touching counts as overlap/intersection).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import InvalidParams


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise InvalidParams(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point


@dataclass(frozen=True)
class Rect:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if not all(np.isfinite(v) for v in (self.min_x, self.min_y, self.max_x, self.max_y)):
            raise InvalidParams("rect coordinates must be finite")
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise InvalidParams(f"rect min must not exceed max: {self}")

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains_point(self, x: float, y: float) -> bool:
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y

    def contains_rect(self, other: "Rect") -> bool:
        return (self.min_x <= other.min_x and other.max_x <= self.max_x
                and self.min_y <= other.min_y and other.max_y <= self.max_y)

    def inflate(self, margin: float) -> "Rect":
        return Rect(self.min_x - margin, self.min_y - margin,
                    self.max_x + margin, self.max_y + margin)

    def union(self, other: "Rect") -> "Rect":
        return Rect(min(self.min_x, other.min_x), min(self.min_y, other.min_y),
                    max(self.max_x, other.max_x), max(self.max_y, other.max_y))


class RectRelation(enum.Enum):
    OUTSIDE = 0
    PARTIAL = 1
    INSIDE = 2


class Trajectory:
    """Identified ordered polyline with at least two vertices.

    Vertices are held as contiguous float64 arrays so the geometry kernels
    can consume them without copying.
    """

    __slots__ = ("id", "xs", "ys", "_mbr")

    def __init__(self, traj_id: str, points: Sequence[Point] | np.ndarray):
        self.id = str(traj_id)
        if isinstance(points, np.ndarray):
            coords = np.ascontiguousarray(points, dtype=np.float64)
            if coords.ndim != 2 or coords.shape[1] != 2:
                raise InvalidParams("coordinate array must have shape (n, 2)")
            xs = np.ascontiguousarray(coords[:, 0])
            ys = np.ascontiguousarray(coords[:, 1])
        else:
            xs = np.array([p.x for p in points], dtype=np.float64)
            ys = np.array([p.y for p in points], dtype=np.float64)
        if xs.shape[0] < 2:
            raise InvalidParams(f"trajectory {traj_id!r} needs at least 2 points")
        if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
            raise InvalidParams(f"trajectory {traj_id!r} has non-finite coordinates")
        self.xs = xs
        self.ys = ys
        self._mbr: Rect | None = None

    @property
    def points(self) -> list[Point]:
        return [Point(float(x), float(y)) for x, y in zip(self.xs, self.ys)]

    @property
    def n_points(self) -> int:
        return int(self.xs.shape[0])

    @property
    def n_segments(self) -> int:
        return self.n_points - 1

    def __len__(self) -> int:
        return self.n_points

    def __repr__(self) -> str:
        return f"Trajectory({self.id!r}, {self.n_points} points)"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (self.id == other.id
                and np.array_equal(self.xs, other.xs)
                and np.array_equal(self.ys, other.ys))

    def __hash__(self):
        return hash((self.id, self.xs.tobytes(), self.ys.tobytes()))

    def translated(self, dx: float, dy: float) -> "Trajectory":
        coords = np.column_stack((self.xs + dx, self.ys + dy))
        return Trajectory(self.id, coords)


def mbr_of(traj: Trajectory) -> Rect:
    """Tightest axis-aligned rectangle containing every vertex."""
    if traj._mbr is None:
        traj._mbr = Rect(float(traj.xs.min()), float(traj.ys.min()),
                         float(traj.xs.max()), float(traj.ys.max()))
    return traj._mbr


def rects_overlap(a: Rect, b: Rect) -> bool:
    """Closed-interval overlap on both axes (shared edges count)."""
    return (a.min_x <= b.max_x and b.min_x <= a.max_x
            and a.min_y <= b.max_y and b.min_y <= a.max_y)


def segment_mbr(seg: Segment) -> Rect:
    return Rect(min(seg.a.x, seg.b.x), min(seg.a.y, seg.b.y),
                max(seg.a.x, seg.b.x), max(seg.a.y, seg.b.y))


def trajectory_intersects(t1: Trajectory, t2: Trajectory) -> bool:
    """True when any segment pair intersects, touching and collinear
    overlap included."""
    a, b = mbr_of(t1), mbr_of(t2)
    if not rects_overlap(a, b):
        return False
    return bool(kernels.polylines_intersect(t1.xs, t1.ys, t2.xs, t2.ys))


def trajectory_distance(t1: Trajectory, t2: Trajectory) -> float:
    """Minimum Euclidean distance over all segment pairs; 0 when the
    trajectories intersect."""
    return float(kernels.polylines_distance(t1.xs, t1.ys, t2.xs, t2.ys))


def rect_relation(traj: Trajectory, rect: Rect) -> RectRelation:
    """INSIDE when the whole polyline lies in the closed rect, PARTIAL when
    some segment intersects it, OUTSIDE otherwise."""
    code = kernels.polyline_rect_relation(traj.xs, traj.ys, rect.min_x,
                                          rect.min_y, rect.max_x, rect.max_y)
    return RectRelation(int(code))


def segmentize(traj: Trajectory) -> list[tuple[Segment, int]]:
    """Consecutive segments of the polyline, tagged with their position."""
    pts = traj.points
    return [(Segment(pts[i], pts[i + 1]), i) for i in range(len(pts) - 1)]


def mbr_union(rects: Iterable[Rect]) -> Rect:
    it = iter(rects)
    out = next(it)
    for r in it:
        out = out.union(r)
    return out
