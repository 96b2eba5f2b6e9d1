"""Seeded synthetic trajectory generators.

Four families with distinct overlap/dispersion signatures:

* ``random``          - walk starts drawn uniformly in the bounding box.
* ``even``            - walk starts at the centers of a raster laid over
                        the box.
* ``skewed``          - most walks start inside Gaussian hotspots, the rest
                        are uniform background.
* ``skewed-overlap``  - like skewed, but part of the background share
                        travels between two hotspots along a jittered
                        straight path, which links the clusters together.

Generation is a pure function of the spec: trajectory i always draws from
a stream derived from (seed, i), so datasets are reproducible and the
per-trajectory work is order independent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .errors import InvalidParams
from .geometry import Point, Rect, Trajectory


class GenKind(enum.Enum):
    RANDOM = "random"
    EVEN = "even"
    SKEWED = "skewed"
    SKEWED_OVERLAP = "skewed-overlap"


@dataclass(frozen=True)
class GenSpec:
    kind: GenKind
    m: int
    k: int
    bbox: Rect = Rect(0.0, 0.0, 1.0, 1.0)
    step: float = 0.005          # mean segment length, fraction of bbox width
    seed: int = 0
    hotspots: int = 10
    sigma: float = 0.02          # hotspot std dev, fraction of bbox width
    hotspot_fraction: float = 0.9
    travel_fraction: float = 0.3

    def __post_init__(self):
        if self.m < 1:
            raise InvalidParams(f"m must be >= 1, got {self.m}")
        if self.k < 1:
            raise InvalidParams(f"k must be >= 1, got {self.k}")
        if self.bbox.width <= 0 or self.bbox.height <= 0:
            raise InvalidParams("bbox must have positive width and height")
        if not 0.0 <= self.hotspot_fraction <= 1.0:
            raise InvalidParams("hotspot_fraction must be in [0, 1]")
        if not 0.0 <= self.travel_fraction <= 1.0:
            raise InvalidParams("travel_fraction must be in [0, 1]")
        if self.step < 0 or self.sigma < 0:
            raise InvalidParams("step and sigma must be non-negative")
        if self.kind in (GenKind.SKEWED, GenKind.SKEWED_OVERLAP) and self.hotspots < 1:
            raise InvalidParams("skewed kinds need at least one hotspot")


def _traj_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def _reflect(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    # Fold positions back into [lo, hi] by mirroring at the walls.
    period = 2.0 * (hi - lo)
    t = np.mod(values - lo, period)
    return lo + np.minimum(t, period - t)


def random_walk(start: Point, k: int, step: float, bbox: Rect,
                rng: np.random.Generator) -> np.ndarray:
    """Coordinates of a k-segment walk from ``start``: uniform headings,
    lengths uniform in [0.5*step, 1.5*step], reflected at the box walls."""
    if not bbox.contains_point(start.x, start.y):
        raise InvalidParams("walk start must lie inside the bounding box")
    headings = rng.uniform(0.0, 2.0 * math.pi, k)
    lengths = rng.uniform(0.5 * step, 1.5 * step, k)
    dx = np.concatenate(([0.0], lengths * np.cos(headings)))
    dy = np.concatenate(([0.0], lengths * np.sin(headings)))
    xs = _reflect(start.x + np.cumsum(dx), bbox.min_x, bbox.max_x)
    ys = _reflect(start.y + np.cumsum(dy), bbox.min_y, bbox.max_y)
    return np.column_stack((xs, ys))


def _smootherstep(u: np.ndarray) -> np.ndarray:
    # Quintic ease: dense near both endpoints, sparse mid-route, so a
    # traveler dwells at its two hotspots.
    return u * u * u * (u * (u * 6.0 - 15.0) + 10.0)


def _clip_to_bbox(coords: np.ndarray, bbox: Rect) -> np.ndarray:
    coords[:, 0] = np.clip(coords[:, 0], bbox.min_x, bbox.max_x)
    coords[:, 1] = np.clip(coords[:, 1], bbox.min_y, bbox.max_y)
    return coords


def generate(spec: GenSpec) -> Dataset:
    """Generate m trajectories of k segments each (m*(k+1) points, all
    inside the bounding box)."""
    bbox = spec.bbox
    step_abs = spec.step * bbox.width
    sigma_abs = spec.sigma * bbox.width
    id_width = max(6, len(str(spec.m - 1)))

    hotspot_centers = None
    if spec.kind in (GenKind.SKEWED, GenKind.SKEWED_OVERLAP):
        ds_rng = _traj_rng(spec.seed, 0)
        hotspot_centers = np.column_stack((
            ds_rng.uniform(bbox.min_x, bbox.max_x, spec.hotspots),
            ds_rng.uniform(bbox.min_y, bbox.max_y, spec.hotspots)))

    if spec.kind is GenKind.EVEN:
        cols = math.ceil(math.sqrt(spec.m))
        rows = math.ceil(spec.m / cols)
        cell_w = bbox.width / cols
        cell_h = bbox.height / rows

    trajectories: list[Trajectory] = []
    for i in range(spec.m):
        rng = _traj_rng(spec.seed, i + 1)
        tid = f"t{i:0{id_width}d}"

        if spec.kind is GenKind.RANDOM:
            start = Point(rng.uniform(bbox.min_x, bbox.max_x),
                          rng.uniform(bbox.min_y, bbox.max_y))
            coords = random_walk(start, spec.k, step_abs, bbox, rng)

        elif spec.kind is GenKind.EVEN:
            row, col = divmod(i, cols)
            start = Point(bbox.min_x + (col + 0.5) * cell_w,
                          bbox.min_y + (row + 0.5) * cell_h)
            coords = random_walk(start, spec.k, step_abs, bbox, rng)

        elif spec.kind is GenKind.SKEWED:
            coords = _skewed_walk(spec, bbox, step_abs, sigma_abs,
                                  hotspot_centers, rng)

        else:  # SKEWED_OVERLAP
            u = rng.random()
            if u < spec.hotspot_fraction:
                coords = _hotspot_walk(spec, bbox, step_abs, sigma_abs,
                                       hotspot_centers, rng)
            elif spec.hotspots >= 2 and rng.random() < spec.travel_fraction:
                coords = _travel_path(spec, bbox, sigma_abs, hotspot_centers, rng)
            else:
                start = Point(rng.uniform(bbox.min_x, bbox.max_x),
                              rng.uniform(bbox.min_y, bbox.max_y))
                coords = random_walk(start, spec.k, step_abs, bbox, rng)

        trajectories.append(Trajectory(tid, coords))

    name = f"{spec.kind.value}-m{spec.m}-k{spec.k}-s{spec.seed}"
    return Dataset(trajectories, name=name, source="generated")


def _hotspot_walk(spec, bbox, step_abs, sigma_abs, centers, rng) -> np.ndarray:
    h = int(rng.integers(spec.hotspots))
    sx = float(np.clip(centers[h, 0] + rng.normal(0.0, sigma_abs),
                       bbox.min_x, bbox.max_x))
    sy = float(np.clip(centers[h, 1] + rng.normal(0.0, sigma_abs),
                       bbox.min_y, bbox.max_y))
    return random_walk(Point(sx, sy), spec.k, step_abs, bbox, rng)


def _skewed_walk(spec, bbox, step_abs, sigma_abs, centers, rng) -> np.ndarray:
    if rng.random() < spec.hotspot_fraction:
        return _hotspot_walk(spec, bbox, step_abs, sigma_abs, centers, rng)
    start = Point(rng.uniform(bbox.min_x, bbox.max_x),
                  rng.uniform(bbox.min_y, bbox.max_y))
    return random_walk(start, spec.k, step_abs, bbox, rng)


def _travel_path(spec, bbox, sigma_abs, centers, rng) -> np.ndarray:
    home = int(rng.integers(spec.hotspots))
    target = (home + 1 + int(rng.integers(spec.hotspots - 1))) % spec.hotspots
    t = _smootherstep(np.arange(spec.k + 1, dtype=np.float64) / spec.k)
    base = centers[home] + t[:, None] * (centers[target] - centers[home])
    jitter = rng.normal(0.0, sigma_abs / 2.0, (spec.k + 1, 2))
    return _clip_to_bbox(base + jitter, bbox)


def quartet(m: int, k: int, seed: int, bbox: Rect | None = None,
            **overrides) -> dict[GenKind, Dataset]:
    """One dataset per generator kind with shared size and seed."""
    base = GenSpec(kind=GenKind.RANDOM, m=m, k=k, seed=seed,
                   bbox=bbox or Rect(0.0, 0.0, 1.0, 1.0), **overrides)
    return {kind: generate(replace(base, kind=kind)) for kind in GenKind}
