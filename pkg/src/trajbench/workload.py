"""Seeded benchmark workload generation with rejection sampling.

Read configs are drawn against the sequential-scan oracle only, so the
backends under test never influence the workload.  Query rects always lie
inside the dataset bounding box and are re-drawn until they return at
least one result; targets are distinct.  Write plans pre-assign disjoint
delete targets so batches never collide.  Everything is a pure function
of (dataset, spec, seed) and serializes to JSON for replay.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .backends import Backend
from .data import Dataset
from .engine import (ContainsMode, QueryKind, QuerySpec, q_contains,
                     q_intersection, q_proximity)
from .errors import InvalidParams, UnsatisfiableWorkload
from .geometry import Point, Rect, Trajectory
from .datagen import random_walk

_STREAM_CONTAINS = 1
_STREAM_INTERSECTION = 2
_STREAM_KNN = 3
_STREAM_PROXIMITY = 4
_STREAM_INSERT = 5
_STREAM_UPDATE = 6
_STREAM_DELETE = 7
_STREAM_MIXED = 8

READ_KINDS = (QueryKind.INTERSECTION, QueryKind.CONTAINS, QueryKind.KNN,
              QueryKind.PROXIMITY)
WRITE_KINDS = ("insert", "update", "delete")


@dataclass(frozen=True)
class WorkloadSpec:
    configs_per_type: int = 50
    rect_side_fraction: float = 0.05
    k_neighbors: int = 10
    proximity_fraction: float = 0.02
    batch_insert_size: int = 100
    batch_mutation_fraction: float = 0.01
    max_rejects: int = 1000
    seed: int = 0
    contains_mode: ContainsMode = ContainsMode.PARTIAL

    def __post_init__(self):
        for name in ("rect_side_fraction", "proximity_fraction",
                     "batch_mutation_fraction"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise InvalidParams(f"{name} must be in (0, 1], got {v}")
        for name in ("configs_per_type", "k_neighbors", "batch_insert_size",
                     "max_rejects"):
            if getattr(self, name) < 1:
                raise InvalidParams(f"{name} must be >= 1")


@dataclass
class WritePlan:
    insert_single: list[list[Trajectory]]
    insert_batch: list[list[Trajectory]]
    update_single: list[list[tuple[str, Trajectory]]]
    update_batch: list[list[tuple[str, Trajectory]]]
    delete_single: list[list[str]]
    delete_batch: list[list[str]]

    def groups(self) -> dict[str, list]:
        return {
            "insert_single": self.insert_single,
            "insert_batch": self.insert_batch,
            "update_single": self.update_single,
            "update_batch": self.update_batch,
            "delete_single": self.delete_single,
            "delete_batch": self.delete_batch,
        }


@dataclass
class MixedPlan:
    read_ratio: float
    # ("read"|"write", kind string, config index)
    sequence: list[tuple[str, str, int]]
    read_configs: dict[QueryKind, list[QuerySpec]]
    inserts: list[Trajectory]
    updates: list[tuple[str, Trajectory]]
    deletes: list[str]


@dataclass
class WorkloadBundle:
    spec: WorkloadSpec
    reads: dict[QueryKind, list[QuerySpec]] | None = None
    writes: WritePlan | None = None
    mixed: dict[float, MixedPlan] = field(default_factory=dict)


def _stream(seed: int, code: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(code,))))


def _sample_rect(rng: np.random.Generator, bbox: Rect, frac: float) -> Rect:
    w = frac * bbox.width
    h = frac * bbox.height
    x = rng.uniform(bbox.min_x, bbox.max_x - w)
    y = rng.uniform(bbox.min_y, bbox.max_y - h)
    return Rect(x, y, x + w, y + h)


# ---------------------------------------------------------------------------
# read configs
# ---------------------------------------------------------------------------

def make_read_configs(ds: Dataset, oracle: Backend, spec: WorkloadSpec,
                      counts: dict[QueryKind, int] | None = None
                      ) -> dict[QueryKind, list[QuerySpec]]:
    """configs_per_type specs per read kind, rejection-sampled against the
    oracle so every intersection/contains/proximity config has at least
    one match."""
    if counts is None:
        counts = {k: spec.configs_per_type for k in READ_KINDS}
    bbox = ds.bbox()
    out: dict[QueryKind, list[QuerySpec]] = {}

    n = counts.get(QueryKind.CONTAINS, 0)
    rng = _stream(spec.seed, _STREAM_CONTAINS)
    rects: list[Rect] = []
    seen: set[tuple] = set()
    rejects = 0
    while len(rects) < n:
        r = _sample_rect(rng, bbox, spec.rect_side_fraction)
        key = (r.min_x, r.min_y, r.max_x, r.max_y)
        if key in seen or not q_contains(oracle, r, spec.contains_mode).ids:
            rejects += 1
            if rejects > spec.max_rejects:
                raise UnsatisfiableWorkload(
                    f"contains rects: {spec.max_rejects} rejections exhausted")
            continue
        seen.add(key)
        rects.append(r)
    out[QueryKind.CONTAINS] = [
        QuerySpec(QueryKind.CONTAINS, rect=r, contains_mode=spec.contains_mode)
        for r in rects]

    def pick_targets(kind: QueryKind, code: int, count: int, accept) -> list[Trajectory]:
        rng = _stream(spec.seed, code)
        targets: list[Trajectory] = []
        used: set[str] = set()
        rejects = 0
        while len(targets) < count:
            t = ds[int(rng.integers(len(ds)))]
            if t.id in used or not accept(t):
                rejects += 1
                if rejects > spec.max_rejects:
                    raise UnsatisfiableWorkload(
                        f"{kind.value} targets: {spec.max_rejects} rejections exhausted")
                continue
            used.add(t.id)
            targets.append(t)
        return targets

    n = counts.get(QueryKind.INTERSECTION, 0)
    out[QueryKind.INTERSECTION] = [
        QuerySpec(QueryKind.INTERSECTION, target=t)
        for t in pick_targets(QueryKind.INTERSECTION, _STREAM_INTERSECTION, n,
                              lambda t: bool(q_intersection(oracle, t).ids))]

    n = counts.get(QueryKind.KNN, 0)
    if n and len(ds) <= spec.k_neighbors:
        raise UnsatisfiableWorkload(
            f"KNN needs more than K={spec.k_neighbors} trajectories, dataset has {len(ds)}")
    out[QueryKind.KNN] = [
        QuerySpec(QueryKind.KNN, target=t, k=spec.k_neighbors)
        for t in pick_targets(QueryKind.KNN, _STREAM_KNN, n, lambda t: True)]

    n = counts.get(QueryKind.PROXIMITY, 0)
    dist = spec.proximity_fraction * bbox.width
    out[QueryKind.PROXIMITY] = [
        QuerySpec(QueryKind.PROXIMITY, target=t, dist=dist)
        for t in pick_targets(QueryKind.PROXIMITY, _STREAM_PROXIMITY, n,
                              lambda t: bool(q_proximity(oracle, t, dist).ids))]
    return out


# ---------------------------------------------------------------------------
# write configs
# ---------------------------------------------------------------------------

def _fresh_id(base: str, existing: set[str]) -> str:
    tid = base
    while tid in existing:
        tid += "x"
    return tid


def _make_walks(ds: Dataset, spec: WorkloadSpec, rng: np.random.Generator,
                prefix: str, count: int, walk_k: int, step: float) -> list[Trajectory]:
    bbox = ds.bbox()
    out = []
    for j in range(count):
        rect = _sample_rect(rng, bbox, spec.rect_side_fraction)
        start = Point(rng.uniform(rect.min_x, rect.max_x),
                      rng.uniform(rect.min_y, rect.max_y))
        coords = random_walk(start, walk_k, step, bbox, rng)
        out.append(Trajectory(_fresh_id(f"{prefix}{j:05d}", ds.ids), coords))
    return out


def _translated(rng: np.random.Generator, t: Trajectory, step: float) -> Trajectory:
    angle = rng.uniform(0.0, 2.0 * math.pi)
    mag = rng.uniform(0.0, step)
    return t.translated(mag * math.cos(angle), mag * math.sin(angle))


def make_write_configs(ds: Dataset, spec: WorkloadSpec) -> WritePlan:
    """50 configs per write kind: single and batch inserts of generated
    walks, updates translating existing geometry by at most one mean
    segment length, deletes of 1 or 1% of the trajectories (all delete
    targets disjoint so a full pass never double-deletes)."""
    m = len(ds)
    c = spec.configs_per_type
    batch = max(1, math.ceil(spec.batch_mutation_fraction * m))
    step = ds.mean_segment_length()
    walk_k = max(1, round(ds.total_segments() / m))

    need_deletes = c + c * batch
    if need_deletes > m:
        raise UnsatisfiableWorkload(
            f"delete configs need {need_deletes} distinct targets, dataset has {m}")

    rng_i = _stream(spec.seed, _STREAM_INSERT)
    insert_single = [[t] for t in _make_walks(ds, spec, rng_i, "wa", c, walk_k, step)]
    batch_trajs = _make_walks(ds, spec, rng_i, "wb", c * spec.batch_insert_size,
                              walk_k, step)
    insert_batch = [batch_trajs[i * spec.batch_insert_size:(i + 1) * spec.batch_insert_size]
                    for i in range(c)]

    rng_u = _stream(spec.seed, _STREAM_UPDATE)
    perm_u = rng_u.permutation(m)
    upd_singles = perm_u[:c]
    upd_batches = perm_u[c:c + c * batch]
    update_single = [[(ds[int(i)].id, _translated(rng_u, ds[int(i)], step))]
                     for i in upd_singles]
    update_batch = []
    for ci in range(c):
        ids = upd_batches[ci * batch:(ci + 1) * batch]
        update_batch.append([(ds[int(i)].id, _translated(rng_u, ds[int(i)], step))
                             for i in ids])

    rng_d = _stream(spec.seed, _STREAM_DELETE)
    perm_d = rng_d.permutation(m)
    delete_single = [[ds[int(i)].id] for i in perm_d[:c]]
    rest = perm_d[c:c + c * batch]
    delete_batch = [[ds[int(i)].id for i in rest[ci * batch:(ci + 1) * batch]]
                    for ci in range(c)]

    return WritePlan(insert_single, insert_batch, update_single, update_batch,
                     delete_single, delete_batch)


# ---------------------------------------------------------------------------
# mixed sequences
# ---------------------------------------------------------------------------

def make_mixed_plan(ds: Dataset, oracle: Backend, spec: WorkloadSpec,
                    read_ratio: float, total_ops: int) -> MixedPlan:
    """A shuffled sequence of total_ops operations with exactly
    round(read_ratio * total_ops) reads; reads cycle through the four
    query kinds, writes through insert/update/delete singles."""
    if not 0.0 <= read_ratio <= 1.0:
        raise InvalidParams("read_ratio must be in [0, 1]")
    if total_ops < 1:
        raise InvalidParams("total_ops must be >= 1")
    n_reads = round(read_ratio * total_ops)
    n_writes = total_ops - n_reads

    read_counts = {k: 0 for k in READ_KINDS}
    for j in range(n_reads):
        read_counts[READ_KINDS[j % 4]] += 1
    write_counts = {k: 0 for k in WRITE_KINDS}
    for j in range(n_writes):
        write_counts[WRITE_KINDS[j % 3]] += 1

    if write_counts["update"] + write_counts["delete"] > len(ds):
        raise UnsatisfiableWorkload(
            "mixed plan needs more update/delete targets than the dataset holds")

    read_configs = make_read_configs(ds, oracle, spec, counts=read_counts)

    step = ds.mean_segment_length()
    walk_k = max(1, round(ds.total_segments() / len(ds)))
    rng = _stream(spec.seed, _STREAM_MIXED)
    inserts = _make_walks(ds, spec, rng, f"wm{read_ratio:g}-", write_counts["insert"],
                          walk_k, step)
    perm = rng.permutation(len(ds))
    upd_idx = perm[:write_counts["update"]]
    del_idx = perm[write_counts["update"]:write_counts["update"] + write_counts["delete"]]
    updates = [(ds[int(i)].id, _translated(rng, ds[int(i)], step)) for i in upd_idx]
    deletes = [ds[int(i)].id for i in del_idx]

    ops: list[tuple[str, str, int]] = []
    per_kind_read = {k: 0 for k in READ_KINDS}
    for j in range(n_reads):
        kind = READ_KINDS[j % 4]
        ops.append(("read", kind.value, per_kind_read[kind]))
        per_kind_read[kind] += 1
    per_kind_write = {k: 0 for k in WRITE_KINDS}
    for j in range(n_writes):
        kind = WRITE_KINDS[j % 3]
        ops.append(("write", kind, per_kind_write[kind]))
        per_kind_write[kind] += 1
    order = rng.permutation(total_ops)
    sequence = [ops[int(i)] for i in order]
    return MixedPlan(read_ratio, sequence, read_configs, inserts, updates, deletes)


# ---------------------------------------------------------------------------
# serialization (replayable config files)
# ---------------------------------------------------------------------------

def _traj_obj(t: Trajectory) -> dict:
    return {"id": t.id, "xy": [[float(x), float(y)] for x, y in zip(t.xs, t.ys)]}


def _spec_obj(qs: QuerySpec) -> dict:
    obj: dict = {"kind": qs.kind.value}
    if qs.kind is QueryKind.CONTAINS:
        obj["rect"] = [qs.rect.min_x, qs.rect.min_y, qs.rect.max_x, qs.rect.max_y]
        obj["mode"] = qs.contains_mode.value
    else:
        obj["target"] = _traj_obj(qs.target)
    if qs.kind is QueryKind.KNN:
        obj["k"] = qs.k
    if qs.kind is QueryKind.PROXIMITY:
        obj["dist"] = qs.dist
    return obj


def reads_to_json(reads: dict[QueryKind, list[QuerySpec]], spec: WorkloadSpec) -> str:
    obj = {
        "params": {
            "configs_per_type": spec.configs_per_type,
            "rect_side_fraction": spec.rect_side_fraction,
            "k_neighbors": spec.k_neighbors,
            "proximity_fraction": spec.proximity_fraction,
            "max_rejects": spec.max_rejects,
            "seed": spec.seed,
            "contains_mode": spec.contains_mode.value,
        },
        "reads": {k.value: [_spec_obj(q) for q in v] for k, v in reads.items()},
    }
    return json.dumps(obj, sort_keys=True, indent=1)


def reads_from_json(text: str) -> dict[QueryKind, list[QuerySpec]]:
    obj = json.loads(text)
    out: dict[QueryKind, list[QuerySpec]] = {}
    for kind_s, specs in obj["reads"].items():
        kind = QueryKind(kind_s)
        lst = []
        for s in specs:
            if kind is QueryKind.CONTAINS:
                lst.append(QuerySpec(kind, rect=Rect(*s["rect"]),
                                     contains_mode=ContainsMode(s["mode"])))
            else:
                t = Trajectory(s["target"]["id"], np.asarray(s["target"]["xy"]))
                lst.append(QuerySpec(kind, target=t, k=s.get("k", 1),
                                     dist=s.get("dist", 0.0)))
        out[kind] = lst
    return out
