import math

import numpy as np
import pytest

from trajbench.backends import (Backend, BackendConfig, IndexKind, QueryStats,
                                StorageFormat)
from trajbench.backends.rtree import RTreeIndex, _area, _union
from trajbench.data import Dataset
from trajbench.datagen import GenKind, GenSpec, generate
from trajbench.errors import DuplicateTrajectory, InvalidParams, NotFound
from trajbench.geometry import Rect, Trajectory
from helpers import probe_rects, traj

INDEXED = (IndexKind.RTREE, IndexKind.QUADTREE, IndexKind.BLOCKRANGE)


def small_ds(m=3, k=10, seed=0) -> Dataset:
    return generate(GenSpec(kind=GenKind.RANDOM, m=m, k=k, seed=seed))


class TestBulkLoad:
    def test_whole_row_per_trajectory(self):
        h = Backend.bulk_load(small_ds(), BackendConfig(format=StorageFormat.WHOLE))
        assert h.row_count() == 3

    def test_segmented_row_per_segment(self):
        h = Backend.bulk_load(small_ds(),
                              BackendConfig(format=StorageFormat.SEGMENTED))
        assert h.row_count() == 30

    def test_blockrange_range_count(self):
        ds = small_ds(m=30, k=10)  # 300 segmented rows
        h = Backend.bulk_load(ds, BackendConfig(format=StorageFormat.SEGMENTED,
                                                index=IndexKind.BLOCKRANGE))
        assert h.index.range_count() == math.ceil(300 / 128)

    def test_config_validation(self):
        with pytest.raises(InvalidParams):
            BackendConfig(rtree_min=9, rtree_max=16)
        with pytest.raises(InvalidParams):
            BackendConfig(brin_range_size=0)


class TestCandidates:
    @pytest.mark.parametrize("fmt", list(StorageFormat))
    @pytest.mark.parametrize("ik", INDEXED)
    def test_equals_seqscan_for_probe_rects(self, fmt, ik):
        ds = generate(GenSpec(kind=GenKind.SKEWED, m=250, k=8, seed=7))
        oracle = Backend.bulk_load(ds, BackendConfig(format=fmt))
        h = Backend.bulk_load(ds, BackendConfig(format=fmt, index=ik))
        for rect in probe_rects(ds.bbox(), 30, seed=11):
            want, _ = oracle.candidates_by_rect(rect)
            got, stats = h.candidates_by_rect(rect)
            assert got == want
            assert stats.candidates_returned == len(got)

    def test_full_bbox_returns_all_ids(self):
        ds = small_ds(m=20)
        h = Backend.bulk_load(ds, BackendConfig(index=IndexKind.RTREE))
        ids, _ = h.candidates_by_rect(ds.bbox())
        assert ids == ds.ids

    def test_disjoint_rect_returns_nothing(self):
        h = Backend.bulk_load(small_ds(), BackendConfig(index=IndexKind.QUADTREE))
        ids, _ = h.candidates_by_rect(Rect(100, 100, 101, 101))
        assert ids == set()


class TestMaintenance:
    @pytest.mark.parametrize("ik", list(IndexKind))
    def test_insert_duplicate_rejected(self, ik):
        ds = small_ds()
        h = Backend.bulk_load(ds, BackendConfig(index=ik))
        with pytest.raises(DuplicateTrajectory):
            h.insert(ds[0])

    @pytest.mark.parametrize("ik", list(IndexKind))
    def test_delete_unknown_rejected(self, ik):
        h = Backend.bulk_load(small_ds(), BackendConfig(index=ik))
        with pytest.raises(NotFound):
            h.delete("nope")

    @pytest.mark.parametrize("fmt,rows", [(StorageFormat.WHOLE, 1),
                                          (StorageFormat.SEGMENTED, 10)])
    def test_row_counts(self, fmt, rows):
        ds = small_ds(k=10)
        h = Backend.bulk_load(ds, BackendConfig(format=fmt, index=IndexKind.RTREE))
        t = generate(GenSpec(kind=GenKind.RANDOM, m=1, k=10, seed=99))[0]
        fresh = Trajectory("fresh", np.column_stack((t.xs, t.ys)))
        assert h.insert(fresh) == rows
        assert h.update("fresh", fresh.translated(0.01, 0.01)) == rows
        assert h.delete("fresh") == rows

    @pytest.mark.parametrize("ik", INDEXED)
    @pytest.mark.parametrize("fmt", list(StorageFormat))
    def test_delete_removes_from_queries(self, ik, fmt):
        ds = small_ds(m=40)
        h = Backend.bulk_load(ds, BackendConfig(format=fmt, index=ik))
        victim = ds[7].id
        h.delete(victim)
        ids, _ = h.candidates_by_rect(ds.bbox())
        assert victim not in ids
        assert ids == ds.ids - {victim}

    def test_update_matches_fresh_build(self):
        ds = small_ds(m=30)
        moved = {ds[3].id, ds[11].id}
        for ik in INDEXED:
            for fmt in StorageFormat:
                h = Backend.bulk_load(ds, BackendConfig(format=fmt, index=ik))
                new_trajs = []
                for t in ds:
                    if t.id in moved:
                        nt = t.translated(0.2, -0.1)
                        h.update(t.id, nt)
                        new_trajs.append(nt)
                    else:
                        new_trajs.append(t)
                rebuilt = Backend.bulk_load(Dataset(new_trajs, name="rb"),
                                            BackendConfig(format=fmt, index=ik))
                for rect in probe_rects(ds.bbox(), 15, seed=3):
                    got, _ = h.candidates_by_rect(rect)
                    want, _ = rebuilt.candidates_by_rect(rect)
                    assert got == want


class TestRTree:
    def test_empty_insert_makes_root_leaf(self):
        idx = RTreeIndex(16, 6)
        idx.insert(0, (0.0, 0.0, 1.0, 1.0))
        assert idx.root.leaf
        assert len(idx.root.entries) == 1

    def test_overflow_split_matches_quadratic_oracle(self):
        # 17th entry into a 16-entry leaf must split into two groups of
        # at least 6, identical to an independent replay of the quadratic
        # seed/next procedure with the same tie rules
        rng = np.random.default_rng(5)
        rects = []
        for i in range(17):
            x, y = rng.uniform(0, 10, 2)
            w, hgt = rng.uniform(0.1, 3, 2)
            rects.append((x, y, x + w, y + hgt))
        idx = RTreeIndex(16, 6)
        for i, r in enumerate(rects):
            idx.insert(i, r)
        assert not idx.root.leaf
        assert len(idx.root.entries) == 2
        groups = [frozenset(rid for _, rid in child.entries)
                  for _, child in idx.root.entries]
        assert all(6 <= len(g) <= 16 for g in groups)
        oracle = _quadratic_split_oracle(rects, min_fill=6)
        assert set(groups) == set(oracle)
        idx.check_invariants()

    def test_invariants_after_random_ops(self):
        rng = np.random.default_rng(8)
        idx = RTreeIndex(16, 6)
        live = {}
        next_id = 0
        for step in range(600):
            if not live or rng.random() < 0.6:
                x, y = rng.uniform(0, 100, 2)
                r = (x, y, x + rng.uniform(0, 5), y + rng.uniform(0, 5))
                idx.insert(next_id, r)
                live[next_id] = r
                next_id += 1
            else:
                rid = list(live)[int(rng.integers(len(live)))]
                idx.remove(rid, live.pop(rid))
            if step % 50 == 0:
                idx.check_invariants()
        idx.check_invariants()
        # every live rect still findable
        stats = QueryStats()
        found = set(idx.query((-1e9, -1e9, 1e9, 1e9), stats))
        assert found == set(live)

    def test_bulk_build_invariants(self):
        rng = np.random.default_rng(2)
        for n in (1, 16, 17, 33, 100, 1000):
            items = []
            for i in range(n):
                x, y = rng.uniform(0, 50, 2)
                items.append(((x, y, x + 1, y + 1), i))
            idx = RTreeIndex(16, 6)
            idx.bulk_build(items)
            idx.check_invariants()
            stats = QueryStats()
            assert len(idx.query((-1e9, -1e9, 1e9, 1e9), stats)) == n


def _quadratic_split_oracle(rects, min_fill):
    """Independent replay of the quadratic split on the full entry list."""
    n = len(rects)
    best = (-math.inf, 0, 0)
    for i in range(n):
        for j in range(i + 1, n):
            waste = (_area(_union(rects[i], rects[j]))
                     - _area(rects[i]) - _area(rects[j]))
            if waste > best[0]:
                best = (waste, i, j)
    _, si, sj = best
    g1, g2 = [si], [sj]
    mbr1, mbr2 = rects[si], rects[sj]
    remaining = [k for k in range(n) if k not in (si, sj)]
    while remaining:
        if len(g1) + len(remaining) == min_fill:
            g1 += remaining
            break
        if len(g2) + len(remaining) == min_fill:
            g2 += remaining
            break
        a1, a2 = _area(mbr1), _area(mbr2)
        pick, pick_d, best_diff = None, None, -math.inf
        for k in remaining:
            d1 = _area(_union(mbr1, rects[k])) - a1
            d2 = _area(_union(mbr2, rects[k])) - a2
            if abs(d1 - d2) > best_diff:
                best_diff = abs(d1 - d2)
                pick, pick_d = k, (d1, d2)
        remaining.remove(pick)
        d1, d2 = pick_d
        to_first = (d1 < d2 or (d1 == d2 and (a1 < a2 or
                    (a1 == a2 and len(g1) <= len(g2)))))
        if to_first:
            g1.append(pick)
            mbr1 = _union(mbr1, rects[pick])
        else:
            g2.append(pick)
            mbr2 = _union(mbr2, rects[pick])
    return [frozenset(g1), frozenset(g2)]


class TestQuadTree:
    def test_invariants_after_load_and_mutation(self):
        ds = generate(GenSpec(kind=GenKind.SKEWED_OVERLAP, m=150, k=8, seed=4))
        h = Backend.bulk_load(ds, BackendConfig(format=StorageFormat.WHOLE,
                                                index=IndexKind.QUADTREE))
        h.index.check_invariants()
        for t in list(ds)[:40]:
            h.delete(t.id)
        h.index.check_invariants()

    def test_root_growth_on_outside_insert(self):
        ds = small_ds(m=10)
        h = Backend.bulk_load(ds, BackendConfig(index=IndexKind.QUADTREE))
        far = traj("far", (50, 50), (51, 51))
        h.insert(far)
        h.index.check_invariants()
        ids, _ = h.candidates_by_rect(Rect(49, 49, 52, 52))
        assert "far" in ids


class TestBlockRange:
    def _loaded(self, m=30):
        ds = small_ds(m=m)
        h = Backend.bulk_load(ds, BackendConfig(format=StorageFormat.SEGMENTED,
                                                index=IndexKind.BLOCKRANGE))
        return ds, h

    def test_insert_maintenance_is_constant(self):
        ds, h = self._loaded()
        t = generate(GenSpec(kind=GenKind.RANDOM, m=1, k=10, seed=31))[0]
        stats = QueryStats()
        h.insert(Trajectory("new", np.column_stack((t.xs, t.ys))), stats)
        # 10 row appends; each touches the tail summary, opening at most
        # one new range per boundary crossing
        assert stats.rows_touched == 10
        assert stats.ranges_scanned <= 10 + 1

    def test_delete_keeps_summaries_until_summarize(self):
        ds, h = self._loaded()
        rect = ds.bbox()
        before_ids, before_stats = h.candidates_by_rect(rect)
        victim = ds[0].id
        h.delete(victim)
        after_ids, after_stats = h.candidates_by_rect(rect)
        assert victim not in after_ids
        assert after_ids == before_ids - {victim}
        h.summarize()
        sum_ids, sum_stats = h.candidates_by_rect(rect)
        assert sum_ids == after_ids
        assert sum_stats.rows_touched <= after_stats.rows_touched

    def test_summaries_tight_after_summarize(self):
        ds, h = self._loaded()
        for t in list(ds)[:15]:
            h.delete(t.id)
        h.summarize()
        for rng_ in h.index.ranges:
            live = [h.rows[rid].rect for rid in rng_.slots if rid in h.rows]
            if not live:
                assert rng_.summary is None
            else:
                assert rng_.summary == (min(r[0] for r in live),
                                        min(r[1] for r in live),
                                        max(r[2] for r in live),
                                        max(r[3] for r in live))

    def test_tombstoned_rows_never_returned(self):
        ds, h = self._loaded()
        victim = ds[3].id
        h.delete(victim)
        for rect in probe_rects(ds.bbox(), 10, seed=1):
            ids, _ = h.candidates_by_rect(rect)
            assert victim not in ids
