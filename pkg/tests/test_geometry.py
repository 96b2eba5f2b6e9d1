import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajbench.errors import InvalidParams
from trajbench.geometry import (Point, Rect, RectRelation, Trajectory, mbr_of,
                                mbr_union, rect_relation, rects_overlap,
                                segmentize, trajectory_distance,
                                trajectory_intersects)
from helpers import l_shaped_disjoint_pair, polyline_distance_oracle, traj


class TestTypes:
    def test_point_rejects_non_finite(self):
        with pytest.raises(InvalidParams):
            Point(float("nan"), 0.0)
        with pytest.raises(InvalidParams):
            Point(0.0, float("inf"))

    def test_trajectory_needs_two_points(self):
        with pytest.raises(InvalidParams):
            traj("t", (0, 0))

    def test_rect_orders_bounds(self):
        with pytest.raises(InvalidParams):
            Rect(1, 0, 0, 1)
        r = Rect(0, 0, 0, 2)  # degenerate width allowed
        assert r.area == 0.0

    def test_segment_count(self):
        t = traj("t", (0, 0), (1, 0), (2, 1))
        assert t.n_points == 3
        assert t.n_segments == 2


class TestMbr:
    def test_componentwise_min_max(self):
        assert mbr_of(traj("t", (0, 0), (2, 1), (1, 3))) == Rect(0, 0, 2, 3)

    def test_degenerate_width(self):
        assert mbr_of(traj("t", (5, 5), (5, 5), (5, 6))) == Rect(5, 5, 5, 6)

    def test_symmetric_around_origin(self):
        assert mbr_of(traj("t", (-1, -1), (1, 1))) == Rect(-1, -1, 1, 1)

    def test_equals_union_of_segment_mbrs(self):
        t = traj("t", (0, 0), (3, 1), (-2, 4), (1, -1))
        from trajbench.geometry import segment_mbr
        union = mbr_union(segment_mbr(s) for s, _ in segmentize(t))
        assert union == mbr_of(t)


class TestRectsOverlap:
    def test_overlapping(self):
        assert rects_overlap(Rect(0, 0, 2, 2), Rect(1, 1, 3, 3))

    def test_disjoint(self):
        assert not rects_overlap(Rect(0, 0, 1, 1), Rect(2, 2, 3, 3))

    def test_shared_edge_counts(self):
        assert rects_overlap(Rect(0, 0, 1, 1), Rect(1, 0, 2, 1))

    def test_symmetric_reflexive(self):
        a, b = Rect(0, 0, 2, 2), Rect(1, -1, 4, 0.5)
        assert rects_overlap(a, b) == rects_overlap(b, a)
        assert rects_overlap(a, a)


class TestIntersects:
    def test_crossing_diagonals(self):
        assert trajectory_intersects(traj("a", (0, 0), (2, 2)),
                                     traj("b", (0, 2), (2, 0)))

    def test_parallel(self):
        assert not trajectory_intersects(traj("a", (0, 0), (1, 0)),
                                         traj("b", (0, 1), (1, 1)))

    def test_l_shaped_mbr_overlap_without_contact(self):
        t1, t2 = l_shaped_disjoint_pair()
        assert rects_overlap(mbr_of(t1), mbr_of(t2))
        assert not trajectory_intersects(t1, t2)

    def test_touching_endpoint_counts(self):
        assert trajectory_intersects(traj("a", (0, 0), (1, 1)),
                                     traj("b", (1, 1), (2, 0)))

    def test_collinear_overlap_counts(self):
        assert trajectory_intersects(traj("a", (0, 0), (2, 0)),
                                     traj("b", (1, 0), (3, 0)))


class TestDistance:
    def test_parallel_lines(self):
        assert trajectory_distance(traj("a", (0, 0), (1, 0)),
                                   traj("b", (0, 2), (1, 2))) == 2.0

    def test_intersecting_is_zero(self):
        assert trajectory_distance(traj("a", (0, 0), (2, 2)),
                                   traj("b", (0, 2), (2, 0))) == 0.0

    def test_endpoint_to_endpoint(self):
        d = trajectory_distance(traj("a", (0, 0), (1, 0)),
                                traj("b", (3, 4), (3, 5)))
        assert d == pytest.approx(math.hypot(2, 4), abs=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_matches_independent_evaluation(self, seed):
        rng = np.random.default_rng(seed)
        t1 = traj("a", *rng.uniform(0, 4, (3, 2)))
        t2 = traj("b", *(rng.uniform(0, 4, (3, 2)) + np.array([5.0, 0.0])))
        got = trajectory_distance(t1, t2)
        want = polyline_distance_oracle(t1, t2)
        assert got == pytest.approx(want, abs=1e-6)


class TestRectRelation:
    def test_inside(self):
        assert rect_relation(traj("t", (1, 1), (2, 2)), Rect(0, 0, 3, 3)) \
            is RectRelation.INSIDE

    def test_partial(self):
        assert rect_relation(traj("t", (1, 1), (5, 5)), Rect(0, 0, 3, 3)) \
            is RectRelation.PARTIAL

    def test_outside(self):
        assert rect_relation(traj("t", (10, 10), (11, 11)), Rect(0, 0, 3, 3)) \
            is RectRelation.OUTSIDE

    def test_pass_through_without_endpoints_inside(self):
        assert rect_relation(traj("t", (-1, 1), (5, 1)), Rect(0, 0, 3, 3)) \
            is RectRelation.PARTIAL

    def test_boundary_touch_is_partial(self):
        assert rect_relation(traj("t", (-1, 0), (0, 0)), Rect(0, 0, 3, 3)) \
            is RectRelation.PARTIAL


class TestSegmentize:
    def test_counts(self):
        assert len(segmentize(traj("t", (0, 0), (1, 0), (2, 0)))) == 2
        t = traj("t", *[(i, i % 2) for i in range(11)])
        assert len(segmentize(t)) == 10

    def test_reproduces_polyline(self):
        t = traj("t", (0, 0), (1, 2), (3, 1), (0, 5))
        segs = segmentize(t)
        assert [i for _, i in segs] == list(range(t.n_segments))
        pts = [segs[0][0].a] + [s.b for s, _ in segs]
        assert [(p.x, p.y) for p in pts] == [(p.x, p.y) for p in t.points]


@st.composite
def random_pair(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    k1 = int(rng.integers(1, 5))
    k2 = int(rng.integers(1, 5))
    t1 = Trajectory("a", rng.uniform(-3, 3, (k1 + 1, 2)))
    t2 = Trajectory("b", rng.uniform(-3, 3, (k2 + 1, 2)))
    return t1, t2


class TestProperties:
    @given(random_pair())
    @settings(max_examples=150, deadline=None)
    def test_intersection_implies_mbr_overlap(self, pair):
        t1, t2 = pair
        if trajectory_intersects(t1, t2):
            assert rects_overlap(mbr_of(t1), mbr_of(t2))

    @given(random_pair())
    @settings(max_examples=150, deadline=None)
    def test_distance_symmetric_and_zero_iff_intersecting(self, pair):
        t1, t2 = pair
        d12 = trajectory_distance(t1, t2)
        assert d12 == trajectory_distance(t2, t1)
        assert (d12 == 0.0) == trajectory_intersects(t1, t2)

    @given(random_pair())
    @settings(max_examples=60, deadline=None)
    def test_intersects_symmetric(self, pair):
        t1, t2 = pair
        assert trajectory_intersects(t1, t2) == trajectory_intersects(t2, t1)
