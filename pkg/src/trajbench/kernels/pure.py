"""Pure Python / numpy implementation of the hot kernels.

This module is the semantic reference: the compiled extension in
``_native.pyx`` mirrors it operation for operation and must return
bit-identical results (the extension is built with FP contraction
disabled so both sides perform the same IEEE-754 double operations).
"""

from __future__ import annotations

import math

import numpy as np

IMPLEMENTATION = "pure"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Stream tags keep the sampling streams of different consumers disjoint
# for the same user-facing seed.
TAG_GOC = 0x474F43
TAG_ANN = 0x414E4E


# ---------------------------------------------------------------------------
# deterministic sampling (splitmix64 + Floyd's subset sampling)
# ---------------------------------------------------------------------------

def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _round_state(seed: int, tag: int, round_index: int) -> int:
    base = _mix64((seed ^ tag) & _MASK64)
    return (base + (round_index + 1) * _GOLDEN) & _MASK64


def sample_indices(total: int, n: int, seed: int, tag: int, round_index: int) -> np.ndarray:
    """Sample n distinct indices from range(total), uniformly, without
    replacement.  Deterministic in (seed, tag, round_index); the compiled
    kernel reproduces the exact same sequence."""
    if n > total:
        raise ValueError("sample size exceeds population")
    state = _round_state(seed, tag, round_index)
    chosen: set[int] = set()
    out = np.empty(n, dtype=np.int64)
    k = 0
    for i in range(total - n, total):
        state = (state + _GOLDEN) & _MASK64
        r = _mix64(state) % (i + 1)
        pick = r if r not in chosen else i
        chosen.add(pick)
        out[k] = pick
        k += 1
    return out


# ---------------------------------------------------------------------------
# rectangle overlap counting
# ---------------------------------------------------------------------------

def _count_pairs_dense(minx, miny, maxx, maxy) -> int:
    ov = (
        (minx[:, None] <= maxx[None, :])
        & (minx[None, :] <= maxx[:, None])
        & (miny[:, None] <= maxy[None, :])
        & (miny[None, :] <= maxy[:, None])
    )
    m = len(minx)
    iu = np.triu_indices(m, k=1)
    return int(np.count_nonzero(ov[iu]))


def count_overlapping_pairs(minx, miny, maxx, maxy) -> int:
    """Number of unordered rect pairs overlapping under closed-interval
    semantics (shared edges count)."""
    m = len(minx)
    if m < 2:
        return 0
    if m <= 2048:
        return _count_pairs_dense(minx, miny, maxx, maxy)
    total = 0
    block = 1024
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        ov = (
            (minx[i0:i1, None] <= maxx[None, i0:])
            & (minx[None, i0:] <= maxx[i0:i1, None])
            & (miny[i0:i1, None] <= maxy[None, i0:])
            & (miny[None, i0:] <= maxy[i0:i1, None])
        )
        rows = np.arange(i0, i1)[:, None]
        cols = np.arange(i0, m)[None, :]
        total += int(np.count_nonzero(ov & (cols > rows)))
    return total


def goc_round_counts(minx, miny, maxx, maxy, n: int, p: int, seed: int,
                     threads: int = 1) -> np.ndarray:
    """Per-round overlapping-pair counts over p sampled subsets of size n.

    Round r samples its subset from the stream (seed, TAG_GOC, r), so the
    result does not depend on execution order or thread count.  Counting
    is batched across rounds in blocks to amortize numpy dispatch.
    """
    m = len(minx)
    idx = np.empty((p, n), dtype=np.int64)
    for r in range(p):
        idx[r] = sample_indices(m, n, seed, TAG_GOC, r)
    counts = np.empty(p, dtype=np.int64)
    iu, ju = np.triu_indices(n, k=1)
    block = max(1, (1 << 22) // max(1, n * n))
    for r0 in range(0, p, block):
        sl = idx[r0:r0 + block]
        x0 = minx[sl]
        y0 = miny[sl]
        x1 = maxx[sl]
        y1 = maxy[sl]
        ov = ((x0[:, :, None] <= x1[:, None, :]) & (x0[:, None, :] <= x1[:, :, None])
              & (y0[:, :, None] <= y1[:, None, :]) & (y0[:, None, :] <= y1[:, :, None]))
        counts[r0:r0 + block] = ov[:, iu, ju].sum(axis=1)
    return counts


# ---------------------------------------------------------------------------
# nearest neighbor over a uniform grid
# ---------------------------------------------------------------------------

def nn_foreign_distances(px, py, owner, queries, x0: float, y0: float,
                         cell: float, nx: int, ny: int, cell_start, order,
                         threads: int = 1) -> np.ndarray:
    """Distance from each query point to its nearest point with a different
    owner, searched ring by ring over a uniform grid.

    Returns NaN for a query with no foreign point anywhere.  Grid layout
    (cell_start/order) is built by the caller and shared verbatim with the
    compiled kernel, so both scan identical candidate sets.
    """
    out = np.empty(len(queries), dtype=np.float64)
    for qpos, qi in enumerate(queries):
        qx = px[qi]
        qy = py[qi]
        own = owner[qi]
        cix = int((qx - x0) / cell)
        if cix > nx - 1:
            cix = nx - 1
        ciy = int((qy - y0) / cell)
        if ciy > ny - 1:
            ciy = ny - 1
        best = math.inf
        r = 0
        while True:
            lox, hix = cix - r, cix + r
            loy, hiy = ciy - r, ciy + r
            pieces = []
            for cy in range(max(loy, 0), min(hiy, ny - 1) + 1):
                if cy == loy or cy == hiy:
                    xs = range(max(lox, 0), min(hix, nx - 1) + 1)
                else:
                    xs = [x for x in (lox, hix) if 0 <= x < nx]
                for cx in xs:
                    c = cy * nx + cx
                    s, e = cell_start[c], cell_start[c + 1]
                    if e > s:
                        pieces.append(order[s:e])
            if pieces:
                idx = np.concatenate(pieces)
                dx = px[idx] - qx
                dy = py[idx] - qy
                d2 = dx * dx + dy * dy
                foreign = owner[idx] != own
                if foreign.any():
                    mn = float(d2[foreign].min())
                    if mn < best:
                        best = mn
            t = r * cell
            if best <= t * t:
                break
            if lox < 0 and hix >= nx and loy < 0 and hiy >= ny:
                break
            r += 1
        out[qpos] = math.sqrt(best) if best != math.inf else math.nan
    return out


# ---------------------------------------------------------------------------
# segment predicates
# ---------------------------------------------------------------------------

def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px_, py_):
    # p is known collinear with a-b
    return (min(ax, bx) <= px_ <= max(ax, bx)
            and min(ay, by) <= py_ <= max(ay, by))


def segments_intersect(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    """Closed-segment intersection: touching endpoints and collinear
    overlap count; zero-length segments behave as points."""
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
       ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if d2 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    if d3 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if d4 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    return False


def _point_segment_d2(px_, py_, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        ex = px_ - ax
        ey = py_ - ay
        return ex * ex + ey * ey
    t = ((px_ - ax) * dx + (py_ - ay) * dy) / l2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    qx = ax + t * dx
    qy = ay + t * dy
    ex = px_ - qx
    ey = py_ - qy
    return ex * ex + ey * ey


def segment_distance(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    """Minimum distance between two closed segments (0 when they touch)."""
    if segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    best = _point_segment_d2(ax, ay, cx, cy, dx, dy)
    d2 = _point_segment_d2(bx, by, cx, cy, dx, dy)
    if d2 < best:
        best = d2
    d2 = _point_segment_d2(cx, cy, ax, ay, bx, by)
    if d2 < best:
        best = d2
    d2 = _point_segment_d2(dx, dy, ax, ay, bx, by)
    if d2 < best:
        best = d2
    return math.sqrt(best)


# ---------------------------------------------------------------------------
# polyline predicates
# ---------------------------------------------------------------------------

def polylines_intersect(x1, y1, x2, y2) -> bool:
    """True when any segment of polyline 1 intersects any segment of
    polyline 2."""
    n1 = len(x1) - 1
    n2 = len(x2) - 1
    for i in range(n1):
        ax, ay, bx, by = x1[i], y1[i], x1[i + 1], y1[i + 1]
        for j in range(n2):
            if segments_intersect(ax, ay, bx, by,
                                  x2[j], y2[j], x2[j + 1], y2[j + 1]):
                return True
    return False


def polylines_distance(x1, y1, x2, y2) -> float:
    """Minimum distance over all segment pairs; 0 when the polylines
    intersect."""
    n1 = len(x1) - 1
    n2 = len(x2) - 1
    best = math.inf
    for i in range(n1):
        ax, ay, bx, by = x1[i], y1[i], x1[i + 1], y1[i + 1]
        for j in range(n2):
            cx, cy, dx, dy = x2[j], y2[j], x2[j + 1], y2[j + 1]
            if segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
                return 0.0
            d2 = _point_segment_d2(ax, ay, cx, cy, dx, dy)
            if d2 < best:
                best = d2
            d2 = _point_segment_d2(bx, by, cx, cy, dx, dy)
            if d2 < best:
                best = d2
            d2 = _point_segment_d2(cx, cy, ax, ay, bx, by)
            if d2 < best:
                best = d2
            d2 = _point_segment_d2(dx, dy, ax, ay, bx, by)
            if d2 < best:
                best = d2
    return math.sqrt(best)


def _segment_intersects_rect(ax, ay, bx, by, minx, miny, maxx, maxy) -> bool:
    if minx <= ax <= maxx and miny <= ay <= maxy:
        return True
    if minx <= bx <= maxx and miny <= by <= maxy:
        return True
    if segments_intersect(ax, ay, bx, by, minx, miny, maxx, miny):
        return True
    if segments_intersect(ax, ay, bx, by, maxx, miny, maxx, maxy):
        return True
    if segments_intersect(ax, ay, bx, by, maxx, maxy, minx, maxy):
        return True
    if segments_intersect(ax, ay, bx, by, minx, maxy, minx, miny):
        return True
    return False


def polyline_rect_relation(xs, ys, minx, miny, maxx, maxy) -> int:
    """0 = outside, 1 = partially intersecting, 2 = fully inside the
    closed rectangle."""
    n = len(xs)
    inside = True
    for i in range(n):
        if not (minx <= xs[i] <= maxx and miny <= ys[i] <= maxy):
            inside = False
            break
    if inside:
        return 2
    for i in range(n - 1):
        if _segment_intersects_rect(xs[i], ys[i], xs[i + 1], ys[i + 1],
                                    minx, miny, maxx, maxy):
            return 1
    return 0
