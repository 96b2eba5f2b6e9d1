"""Shared storage layer and the maintenance/candidate contract.

A backend is a dataset loaded in one of two formats (one row per
trajectory, or one row per segment) under one index family.  All index
families answer the same question: which stored rows have an MBR
overlapping a query rect.  Candidates are exact at the MBR level, so
every backend returns the same id set as a sequential scan; the families
differ only in how much work the counters record.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..data import Dataset
from ..errors import DuplicateTrajectory, InvalidParams, NotFound
from ..geometry import Rect, Trajectory, mbr_of

if TYPE_CHECKING:
    from .blockrange import BlockRangeIndex


class StorageFormat(enum.Enum):
    WHOLE = "whole"
    SEGMENTED = "segmented"


class IndexKind(enum.Enum):
    RTREE = "rtree"
    QUADTREE = "quadtree"
    BLOCKRANGE = "blockrange"
    SEQSCAN = "seqscan"


@dataclass(frozen=True)
class BackendConfig:
    format: StorageFormat = StorageFormat.WHOLE
    index: IndexKind = IndexKind.SEQSCAN
    rtree_max: int = 16
    rtree_min: int = 6
    quad_capacity: int = 16
    quad_max_depth: int = 16
    brin_range_size: int = 128

    def __post_init__(self):
        if not 2 <= self.rtree_min <= self.rtree_max // 2:
            raise InvalidParams(
                f"need 2 <= rtree_min <= rtree_max/2, got {self.rtree_min}/{self.rtree_max}")
        if self.quad_capacity < 1:
            raise InvalidParams("quad_capacity must be >= 1")
        if self.quad_max_depth < 1:
            raise InvalidParams("quad_max_depth must be >= 1")
        if self.brin_range_size < 1:
            raise InvalidParams("brin_range_size must be >= 1")

    def label(self) -> str:
        return f"{self.format.value}/{self.index.value}"


@dataclass
class QueryStats:
    """Hardware-independent work counters, reset per operation."""

    nodes_visited: int = 0
    ranges_scanned: int = 0
    candidates_returned: int = 0
    exact_tests: int = 0
    rows_touched: int = 0

    def reset(self) -> None:
        self.nodes_visited = 0
        self.ranges_scanned = 0
        self.candidates_returned = 0
        self.exact_tests = 0
        self.rows_touched = 0


@dataclass
class StoredRow:
    row_id: int
    traj_id: str
    seq: int            # segment position; -1 for whole-trajectory rows
    rect: tuple[float, float, float, float]
    # segment endpoint coordinates for segmented rows; whole rows keep the
    # trajectory object instead
    coords: tuple[float, float, float, float] | None = None


def _rect_tuple(r: Rect) -> tuple[float, float, float, float]:
    return (r.min_x, r.min_y, r.max_x, r.max_y)


def rects_overlap_t(a: tuple, b: tuple) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


class Backend:
    """A loaded dataset x format x index combination."""

    def __init__(self, cfg: BackendConfig):
        self.cfg = cfg
        self.rows: dict[int, StoredRow] = {}
        self.traj_rows: dict[str, list[int]] = {}
        self.geoms: dict[str, Trajectory] = {}
        self.next_row_id = 0
        self.index = _make_index(cfg, self)
        self._bbox_cache: Rect | None = None
        self._bbox_dirty = True

    # -- loading ---------------------------------------------------------

    @classmethod
    def bulk_load(cls, ds: Dataset, cfg: BackendConfig) -> "Backend":
        """One row per trajectory (whole) or per segment (segmented), in
        dataset order; the index is built over all rows afterwards."""
        h = cls(cfg)
        items: list[tuple[tuple, int]] = []
        for traj in ds:
            row_ids = h._store_rows(traj)
            items.extend((h.rows[rid].rect, rid) for rid in row_ids)
        if h.index is not None:
            h.index.bulk_build(items)
        return h

    def _store_rows(self, traj: Trajectory) -> list[int]:
        if traj.id in self.traj_rows:
            raise DuplicateTrajectory(f"trajectory {traj.id!r} already stored")
        self._bbox_dirty = True
        row_ids: list[int] = []
        if self.cfg.format is StorageFormat.WHOLE:
            rect = _rect_tuple(mbr_of(traj))
            rid = self.next_row_id
            self.next_row_id += 1
            self.rows[rid] = StoredRow(rid, traj.id, -1, rect)
            row_ids.append(rid)
        else:
            xs, ys = traj.xs, traj.ys
            for i in range(traj.n_segments):
                ax, ay, bx, by = xs[i], ys[i], xs[i + 1], ys[i + 1]
                rect = (min(ax, bx), min(ay, by), max(ax, bx), max(ay, by))
                rid = self.next_row_id
                self.next_row_id += 1
                self.rows[rid] = StoredRow(rid, traj.id, i, rect,
                                           (float(ax), float(ay), float(bx), float(by)))
                row_ids.append(rid)
        self.traj_rows[traj.id] = row_ids
        self.geoms[traj.id] = traj
        return row_ids

    # -- queries ---------------------------------------------------------

    def candidates_by_rect(self, rect: Rect,
                           stats: QueryStats | None = None) -> tuple[set[str], QueryStats]:
        """Owner ids of all rows whose stored MBR overlaps ``rect`` under
        closed-interval semantics; exact w.r.t. a sequential scan."""
        if stats is None:
            stats = QueryStats()
        q = _rect_tuple(rect)
        ids: set[str] = set()
        if self.index is None:
            for row in self.rows.values():
                stats.rows_touched += 1
                if rects_overlap_t(row.rect, q):
                    ids.add(row.traj_id)
        else:
            for rid in self.index.query(q, stats):
                ids.add(self.rows[rid].traj_id)
        stats.candidates_returned += len(ids)
        return ids, stats

    def trajectory_ids(self) -> set[str]:
        return set(self.traj_rows.keys())

    def trajectory_count(self) -> int:
        return len(self.traj_rows)

    def row_count(self) -> int:
        return len(self.rows)

    def get_geometry(self, traj_id: str) -> Trajectory:
        if traj_id not in self.geoms:
            raise NotFound(f"trajectory {traj_id!r} not stored")
        return self.geoms[traj_id]

    def reconstruct_coords(self, traj_id: str) -> tuple[np.ndarray, np.ndarray]:
        """Polyline coordinates rebuilt from the stored rows (segmented
        rows are stitched back in segment order)."""
        if traj_id not in self.traj_rows:
            raise NotFound(f"trajectory {traj_id!r} not stored")
        if self.cfg.format is StorageFormat.WHOLE:
            t = self.geoms[traj_id]
            return t.xs, t.ys
        rows = sorted((self.rows[rid] for rid in self.traj_rows[traj_id]),
                      key=lambda r: r.seq)
        xs = np.empty(len(rows) + 1, dtype=np.float64)
        ys = np.empty(len(rows) + 1, dtype=np.float64)
        for i, row in enumerate(rows):
            ax, ay, bx, by = row.coords
            xs[i] = ax
            ys[i] = ay
            if i == len(rows) - 1:
                xs[i + 1] = bx
                ys[i + 1] = by
        return xs, ys

    def store_bbox(self) -> Rect | None:
        """MBR of all stored rows, cached between mutations."""
        if self._bbox_dirty:
            if not self.rows:
                self._bbox_cache = None
            else:
                rects = self.rows.values()
                self._bbox_cache = Rect(
                    min(r.rect[0] for r in rects), min(r.rect[1] for r in rects),
                    max(r.rect[2] for r in rects), max(r.rect[3] for r in rects))
            self._bbox_dirty = False
        return self._bbox_cache

    # -- maintenance -----------------------------------------------------

    def insert(self, traj: Trajectory, stats: QueryStats | None = None) -> int:
        """Store a new trajectory and maintain the index; returns rows
        written."""
        if stats is None:
            stats = QueryStats()
        row_ids = self._store_rows(traj)
        for rid in row_ids:
            stats.rows_touched += 1
            if self.index is not None:
                self.index.insert(rid, self.rows[rid].rect, stats)
        return len(row_ids)

    def delete(self, traj_id: str, stats: QueryStats | None = None) -> int:
        """Remove all rows of a trajectory; returns rows removed."""
        if stats is None:
            stats = QueryStats()
        if traj_id not in self.traj_rows:
            raise NotFound(f"trajectory {traj_id!r} not stored")
        self._bbox_dirty = True
        row_ids = self.traj_rows.pop(traj_id)
        self.geoms.pop(traj_id)
        for rid in row_ids:
            row = self.rows.pop(rid)
            stats.rows_touched += 1
            if self.index is not None:
                self.index.remove(rid, row.rect, stats)
        return len(row_ids)

    def update(self, traj_id: str, new_geometry: Trajectory,
               stats: QueryStats | None = None) -> int:
        """Replace a trajectory's geometry keeping its id; returns rows
        written for the new geometry."""
        if stats is None:
            stats = QueryStats()
        if traj_id not in self.traj_rows:
            raise NotFound(f"trajectory {traj_id!r} not stored")
        renamed = Trajectory(traj_id, np.column_stack((new_geometry.xs,
                                                       new_geometry.ys)))
        self.delete(traj_id, stats)
        return self.insert(renamed, stats)

    def summarize(self) -> None:
        """Rebuild tight block-range summaries (no-op for other indexes)."""
        from .blockrange import BlockRangeIndex
        if isinstance(self.index, BlockRangeIndex):
            self.index.summarize()


def _make_index(cfg: BackendConfig, backend: Backend):
    from .blockrange import BlockRangeIndex
    from .quadtree import QuadTreeIndex
    from .rtree import RTreeIndex
    if cfg.index is IndexKind.SEQSCAN:
        return None
    if cfg.index is IndexKind.RTREE:
        return RTreeIndex(cfg.rtree_max, cfg.rtree_min)
    if cfg.index is IndexKind.QUADTREE:
        return QuadTreeIndex(cfg.quad_capacity, cfg.quad_max_depth)
    if cfg.index is IndexKind.BLOCKRANGE:
        return BlockRangeIndex(cfg.brin_range_size, backend.rows)
    raise InvalidParams(f"unknown index kind {cfg.index}")


def bulk_load(ds: Dataset, cfg: BackendConfig) -> Backend:
    return Backend.bulk_load(ds, cfg)
