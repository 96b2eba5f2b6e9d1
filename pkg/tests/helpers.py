"""Test-local oracles and dataset builders.

The geometric helpers here are deliberately independent of the package's
kernel implementations: plain formula evaluations used to cross-check
them.
"""

from __future__ import annotations

import math

import numpy as np

from trajbench.data import Dataset
from trajbench.geometry import Rect, Trajectory


def traj(tid: str, *pts) -> Trajectory:
    return Trajectory(tid, np.array(pts, dtype=float))


def point_segment_distance(px, py, ax, ay, bx, by) -> float:
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / l2))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def brute_segments_cross(a, b, c, d) -> bool:
    """Segment intersection via dense distance evaluation: the segments
    touch iff some point of one is within epsilon of the other.  Only used
    on integer-ish coordinates where exact contact is representable."""
    best = math.inf
    for (p, q), (r, s) in ((( a, b), (c, d)),):
        for t in np.linspace(0.0, 1.0, 401):
            x = p[0] + t * (q[0] - p[0])
            y = p[1] + t * (q[1] - p[1])
            best = min(best, point_segment_distance(x, y, r[0], r[1], s[0], s[1]))
    return best < 1e-9


def polyline_distance_oracle(t1: Trajectory, t2: Trajectory) -> float:
    """Min distance over all endpoint-to-segment combinations plus a dense
    sweep; exact for non-crossing pairs, approximate (upper bound) for
    crossing ones."""
    best = math.inf
    for i in range(t1.n_points - 1):
        for j in range(t2.n_points - 1):
            a = (t1.xs[i], t1.ys[i]); b = (t1.xs[i + 1], t1.ys[i + 1])
            c = (t2.xs[j], t2.ys[j]); d = (t2.xs[j + 1], t2.ys[j + 1])
            for (px, py), (sx, sy, ex, ey) in (
                    (a, (*c, *d)), (b, (*c, *d)), (c, (*a, *b)), (d, (*a, *b))):
                best = min(best, point_segment_distance(px, py, sx, sy, ex, ey))
            # parameter sweep catches interior crossings
            for t in np.linspace(0.0, 1.0, 33):
                px = a[0] + t * (b[0] - a[0])
                py = a[1] + t * (b[1] - a[1])
                best = min(best, point_segment_distance(px, py, *c, *d))
    return best


def nn_brute_force(px, py, owner) -> np.ndarray:
    dx = px[:, None] - px[None, :]
    dy = py[:, None] - py[None, :]
    d2 = dx * dx + dy * dy
    d2[owner[:, None] == owner[None, :]] = np.inf
    return np.sqrt(d2.min(axis=1))


def fig_three_trajectories() -> Dataset:
    """Three trajectories where the first's MBR overlaps the other two,
    which are mutually disjoint: overlap-graph density 2/3."""
    t1 = traj("a", (0, 0), (4, 4))
    t2 = traj("b", (0, 3), (1, 4))
    t3 = traj("c", (3, 0), (4, 1))
    return Dataset([t1, t2, t3], name="fig3")


def l_shaped_disjoint_pair() -> tuple[Trajectory, Trajectory]:
    """MBRs overlap, geometries do not touch."""
    t1 = traj("p", (0, 0), (0, 3), (3, 3))
    t2 = traj("q", (2, 0), (2, 1), (3, 1))
    return t1, t2


def probe_rects(bbox: Rect, count: int, seed: int) -> list[Rect]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        w = rng.uniform(0.02, 0.6) * bbox.width
        h = rng.uniform(0.02, 0.6) * bbox.height
        x = rng.uniform(bbox.min_x, bbox.max_x - w)
        y = rng.uniform(bbox.min_y, bbox.max_y - h)
        out.append(Rect(x, y, x + w, y + h))
    return out
