"""Filter-refine execution of the four read queries and three write
operations over any backend.

Every read query filters candidate trajectory ids through the backend's
MBR index, then refines them with exact segment geometry reconstructed
from the stored rows.  Results are therefore identical across index
families and storage formats; only the work counters differ.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

from . import kernels
from .backends import Backend, QueryStats
from .errors import InsufficientData, InvalidParams
from .geometry import Rect, RectRelation, Trajectory, mbr_of


class ContainsMode(enum.Enum):
    PARTIAL = "partial"
    COMPLETE = "complete"


class QueryKind(enum.Enum):
    INTERSECTION = "intersection"
    CONTAINS = "contains"
    KNN = "knn"
    PROXIMITY = "proximity"


@dataclass(frozen=True)
class QuerySpec:
    kind: QueryKind
    target: Trajectory | None = None
    rect: Rect | None = None
    k: int = 1
    dist: float = 0.0
    contains_mode: ContainsMode = ContainsMode.PARTIAL

    def __post_init__(self):
        if self.kind is QueryKind.CONTAINS:
            if self.rect is None:
                raise InvalidParams("contains query needs a rect")
        elif self.target is None:
            raise InvalidParams(f"{self.kind.value} query needs a target trajectory")
        if self.kind is QueryKind.KNN and self.k < 1:
            raise InvalidParams("K must be >= 1")
        if self.kind is QueryKind.PROXIMITY and self.dist < 0:
            raise InvalidParams("proximity distance must be >= 0")


@dataclass
class QueryResult:
    ids: list[str]
    stats: QueryStats
    elapsed_us: float
    distances: list[float] | None = None

    @property
    def id_set(self) -> set[str]:
        return set(self.ids)


def execute(h: Backend, spec: QuerySpec) -> QueryResult:
    if spec.kind is QueryKind.INTERSECTION:
        return q_intersection(h, spec.target)
    if spec.kind is QueryKind.CONTAINS:
        return q_contains(h, spec.rect, spec.contains_mode)
    if spec.kind is QueryKind.KNN:
        return q_knn(h, spec.target, spec.k)
    return q_proximity(h, spec.target, spec.dist)


def _refine_candidates(h: Backend, target: Trajectory, ids: set[str],
                       stats: QueryStats):
    """Yield (traj_id, exact distance) for candidates, counting segment
    pair evaluations."""
    txs, tys = target.xs, target.ys
    tsegs = len(txs) - 1
    for tid in sorted(ids):
        if tid == target.id:
            continue
        xs, ys = h.reconstruct_coords(tid)
        stats.exact_tests += tsegs * (len(xs) - 1)
        yield tid, float(kernels.polylines_distance(txs, tys, xs, ys))


def q_intersection(h: Backend, target: Trajectory) -> QueryResult:
    """All stored trajectories whose geometry intersects the target's
    (the target's own id excluded)."""
    t0 = time.perf_counter()
    stats = QueryStats()
    cand, _ = h.candidates_by_rect(mbr_of(target), stats)
    out = []
    txs, tys = target.xs, target.ys
    tsegs = len(txs) - 1
    for tid in sorted(cand):
        if tid == target.id:
            continue
        xs, ys = h.reconstruct_coords(tid)
        stats.exact_tests += tsegs * (len(xs) - 1)
        if kernels.polylines_intersect(txs, tys, xs, ys):
            out.append(tid)
    return QueryResult(out, stats, (time.perf_counter() - t0) * 1e6)


def q_contains(h: Backend, rect: Rect, mode: ContainsMode) -> QueryResult:
    """Trajectories partially (any segment touching) or completely (whole
    polyline inside) within the rect."""
    t0 = time.perf_counter()
    stats = QueryStats()
    cand, _ = h.candidates_by_rect(rect, stats)
    out = []
    for tid in sorted(cand):
        xs, ys = h.reconstruct_coords(tid)
        stats.exact_tests += len(xs) - 1
        code = int(kernels.polyline_rect_relation(xs, ys, rect.min_x, rect.min_y,
                                                  rect.max_x, rect.max_y))
        if mode is ContainsMode.COMPLETE:
            if code == RectRelation.INSIDE.value:
                out.append(tid)
        else:
            if code != RectRelation.OUTSIDE.value:
                out.append(tid)
    return QueryResult(out, stats, (time.perf_counter() - t0) * 1e6)


def q_knn(h: Backend, target: Trajectory, k: int) -> QueryResult:
    """The K stored trajectories nearest to the target, ascending by exact
    distance, ties broken by smaller id.

    Expanding-window search: candidates are filtered through the target
    MBR inflated by radius r, refined exactly, and r doubles until the
    k-th refined distance is covered by the window (any unseen trajectory
    must then be farther than r).
    """
    t0 = time.perf_counter()
    stats = QueryStats()
    others = h.trajectory_count() - (1 if target.id in h.traj_rows else 0)
    if others < k:
        raise InsufficientData(f"KNN needs {k} other trajectories, store has {others}")
    tm = mbr_of(target)
    store_box = h.store_bbox()
    diag = (tm.width ** 2 + tm.height ** 2) ** 0.5
    if diag <= 0.0:
        base = (store_box.width ** 2 + store_box.height ** 2) ** 0.5 if store_box else 0.0
        diag = base * 1e-3 if base > 0 else 1.0
    r = diag / 2.0
    refined: dict[str, float] = {}
    while True:
        window = tm.inflate(r)
        cand, _ = h.candidates_by_rect(window, stats)
        new = cand - refined.keys() - {target.id}
        for tid, d in _refine_candidates(h, target, new, stats):
            refined[tid] = d
        ranked = sorted(refined.items(), key=lambda kv: (kv[1], kv[0]))
        if len(ranked) >= k and ranked[k - 1][1] <= r:
            break
        if store_box is not None and window.contains_rect(store_box) \
                and len(refined) >= others:
            break
        r *= 2.0
    top = ranked[:k]
    return QueryResult([tid for tid, _ in top], stats,
                       (time.perf_counter() - t0) * 1e6,
                       distances=[d for _, d in top])


def q_proximity(h: Backend, target: Trajectory, dist: float) -> QueryResult:
    """Trajectories within ``dist`` of the target (own id excluded); with
    dist=0 this is exactly the intersection query."""
    t0 = time.perf_counter()
    stats = QueryStats()
    cand, _ = h.candidates_by_rect(mbr_of(target).inflate(dist), stats)
    out = []
    for tid, d in _refine_candidates(h, target, cand, stats):
        if d <= dist:
            out.append(tid)
    return QueryResult(out, stats, (time.perf_counter() - t0) * 1e6)


# ---------------------------------------------------------------------------
# write operations
# ---------------------------------------------------------------------------

@dataclass
class WriteResult:
    rows_affected: int
    trajectories_affected: int
    stats: QueryStats
    elapsed_us: float


def w_insert(h: Backend, trajs: list[Trajectory]) -> WriteResult:
    t0 = time.perf_counter()
    stats = QueryStats()
    rows = 0
    for t in trajs:
        rows += h.insert(t, stats)
    return WriteResult(rows, len(trajs), stats, (time.perf_counter() - t0) * 1e6)


def w_update(h: Backend, pairs: list[tuple[str, Trajectory]]) -> WriteResult:
    t0 = time.perf_counter()
    stats = QueryStats()
    rows = 0
    for tid, geom in pairs:
        rows += h.update(tid, geom, stats)
    return WriteResult(rows, len(pairs), stats, (time.perf_counter() - t0) * 1e6)


def w_delete(h: Backend, ids: list[str]) -> WriteResult:
    t0 = time.perf_counter()
    stats = QueryStats()
    rows = 0
    for tid in ids:
        rows += h.delete(tid, stats)
    return WriteResult(rows, len(ids), stats, (time.perf_counter() - t0) * 1e6)
