# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot kernels.

Mirrors ``pure.py`` operation for operation; built with -ffp-contract=off
so double arithmetic matches numpy bit for bit.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport INFINITY, NAN, sqrt
from libc.stdlib cimport free, malloc

IMPLEMENTATION = "native"

TAG_GOC = 0x474F43
TAG_ANN = 0x414E4E

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15
cdef unsigned long long TAG_GOC_C = 0x474F43
cdef unsigned long long MIX_A = 0xBF58476D1CE4E5B9
cdef unsigned long long MIX_B = 0x94D049BB133111EB


cdef inline unsigned long long _mix64(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX_A
    z = (z ^ (z >> 27)) * MIX_B
    return z ^ (z >> 31)


cdef inline unsigned long long _round_state(unsigned long long seed,
                                            unsigned long long tag,
                                            unsigned long long round_index) noexcept nogil:
    return _mix64(seed ^ tag) + (round_index + 1) * GOLDEN


cdef inline bint _tbl_contains(long long* table, long long mask, int shift,
                               long long key) noexcept nogil:
    cdef unsigned long long h = (<unsigned long long> key) * GOLDEN
    cdef long long idx = <long long> (h >> shift) & mask
    while table[idx] != -1:
        if table[idx] == key:
            return True
        idx = (idx + 1) & mask
    return False


cdef inline void _tbl_add(long long* table, long long mask, int shift,
                          long long key) noexcept nogil:
    cdef unsigned long long h = (<unsigned long long> key) * GOLDEN
    cdef long long idx = <long long> (h >> shift) & mask
    while table[idx] != -1:
        idx = (idx + 1) & mask
    table[idx] = key


cdef inline void _floyd_sample(long long total, long long n,
                               unsigned long long state,
                               long long* out, long long* table,
                               long long cap, int shift) noexcept nogil:
    # Floyd's algorithm: uniform subset of size n without replacement.
    cdef long long i, k = 0, pick
    cdef unsigned long long r
    for i in range(cap):
        table[i] = -1
    for i in range(total - n, total):
        state = state + GOLDEN
        r = _mix64(state) % (<unsigned long long> (i + 1))
        pick = <long long> r
        if _tbl_contains(table, cap - 1, shift, pick):
            pick = i
        _tbl_add(table, cap - 1, shift, pick)
        out[k] = pick
        k += 1


cdef inline long long _table_capacity(long long n, int* shift_out) noexcept nogil:
    cdef long long cap = 8
    cdef int bits = 3
    while cap < 4 * n:
        cap <<= 1
        bits += 1
    shift_out[0] = 64 - bits
    return cap


def sample_indices(Py_ssize_t total, Py_ssize_t n, object seed, object tag,
                   Py_ssize_t round_index):
    """Same subset stream as the pure implementation."""
    if n > total:
        raise ValueError("sample size exceeds population")
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] out_v = out
    cdef unsigned long long state = _round_state(
        <unsigned long long> (int(seed) & 0xFFFFFFFFFFFFFFFF),
        <unsigned long long> (int(tag) & 0xFFFFFFFFFFFFFFFF),
        <unsigned long long> round_index)
    cdef int shift = 0
    cdef long long cap = _table_capacity(n if n > 0 else 1, &shift)
    cdef long long* table = <long long*> malloc(cap * sizeof(long long))
    if table == NULL:
        raise MemoryError()
    try:
        with nogil:
            if n > 0:
                _floyd_sample(total, n, state, &out_v[0], table, cap, shift)
    finally:
        free(table)
    return out


def count_overlapping_pairs(double[::1] minx, double[::1] miny,
                            double[::1] maxx, double[::1] maxy):
    # branchless accumulation keeps the per-pair cost independent of the
    # data layout (regular layouts would otherwise win on prediction)
    cdef Py_ssize_t m = minx.shape[0]
    cdef long long total = 0
    cdef int hit
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(m):
            for j in range(i + 1, m):
                hit = (minx[i] <= maxx[j]) & (minx[j] <= maxx[i]) \
                    & (miny[i] <= maxy[j]) & (miny[j] <= maxy[i])
                total += hit
    return total


cdef long long _goc_one_round(double* minx, double* miny, double* maxx,
                              double* maxy, long long m, long long n,
                              unsigned long long seed,
                              unsigned long long round_index) noexcept nogil:
    cdef int shift = 0
    cdef long long cap = _table_capacity(n, &shift)
    cdef long long* sample = <long long*> malloc(n * sizeof(long long))
    cdef long long* table = <long long*> malloc(cap * sizeof(long long))
    cdef double* sx0 = <double*> malloc(4 * n * sizeof(double))
    cdef long long count = 0
    cdef long long i, j, idx
    cdef int hit
    cdef double* sy0
    cdef double* sx1
    cdef double* sy1
    if sample == NULL or table == NULL or sx0 == NULL:
        if sample != NULL:
            free(sample)
        if table != NULL:
            free(table)
        if sx0 != NULL:
            free(sx0)
        return -1
    sy0 = sx0 + n
    sx1 = sy0 + n
    sy1 = sx1 + n
    _floyd_sample(m, n, _round_state(seed, TAG_GOC_C, round_index),
                  sample, table, cap, shift)
    for i in range(n):
        idx = sample[i]
        sx0[i] = minx[idx]
        sy0[i] = miny[idx]
        sx1[i] = maxx[idx]
        sy1[i] = maxy[idx]
    for i in range(n):
        for j in range(i + 1, n):
            hit = (sx0[i] <= sx1[j]) & (sx0[j] <= sx1[i]) \
                & (sy0[i] <= sy1[j]) & (sy0[j] <= sy1[i])
            count += hit
    free(sample)
    free(table)
    free(sx0)
    return count


def goc_round_counts(double[::1] minx, double[::1] miny, double[::1] maxx,
                     double[::1] maxy, Py_ssize_t n, Py_ssize_t p,
                     object seed, int threads=1):
    """Per-round overlapping-pair counts; rounds run in parallel but each
    derives its own stream, so results are thread-count independent."""
    cdef long long m = minx.shape[0]
    counts = np.empty(p, dtype=np.int64)
    cdef long long[::1] cv = counts
    cdef unsigned long long seed_c = <unsigned long long> (int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t r
    cdef int nt = threads if threads > 0 else 1
    for r in prange(p, nogil=True, num_threads=nt, schedule='static'):
        cv[r] = _goc_one_round(&minx[0], &miny[0], &maxx[0], &maxy[0],
                               m, n, seed_c, <unsigned long long> r)
    if np.any(counts < 0):
        raise MemoryError()
    return counts


# ---------------------------------------------------------------------------
# nearest neighbor over a uniform grid
# ---------------------------------------------------------------------------

cdef double _nn_one(double* px, double* py, long long* owner, long long qi,
                    double x0, double y0, double cell, long long nx,
                    long long ny, long long* cell_start,
                    long long* order) noexcept nogil:
    cdef double qx = px[qi]
    cdef double qy = py[qi]
    cdef long long own = owner[qi]
    cdef long long cix = <long long> ((qx - x0) / cell)
    cdef long long ciy = <long long> ((qy - y0) / cell)
    cdef double best = INFINITY
    cdef long long r = 0
    cdef long long lox, hix, loy, hiy, cy, cx, c, s, e, k, j
    cdef double dx, dy, d2, t
    cdef bint border
    if cix > nx - 1:
        cix = nx - 1
    if ciy > ny - 1:
        ciy = ny - 1
    while True:
        lox = cix - r
        hix = cix + r
        loy = ciy - r
        hiy = ciy + r
        cy = loy if loy >= 0 else 0
        while cy <= (hiy if hiy <= ny - 1 else ny - 1):
            border = cy == loy or cy == hiy
            cx = lox if lox >= 0 else 0
            while cx <= (hix if hix <= nx - 1 else nx - 1):
                if border or cx == lox or cx == hix:
                    c = cy * nx + cx
                    s = cell_start[c]
                    e = cell_start[c + 1]
                    for k in range(s, e):
                        j = order[k]
                        if owner[j] != own:
                            dx = px[j] - qx
                            dy = py[j] - qy
                            d2 = dx * dx + dy * dy
                            if d2 < best:
                                best = d2
                cx += 1
            cy += 1
        t = r * cell
        if best <= t * t:
            break
        if lox < 0 and hix >= nx and loy < 0 and hiy >= ny:
            break
        r += 1
    if best == INFINITY:
        return NAN
    return sqrt(best)


def nn_foreign_distances(double[::1] px, double[::1] py, long long[::1] owner,
                         long long[::1] queries, double x0, double y0,
                         double cell, long long nx, long long ny,
                         long long[::1] cell_start, long long[::1] order,
                         int threads=1):
    cdef Py_ssize_t nq = queries.shape[0]
    out = np.empty(nq, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t qpos
    cdef int nt = threads if threads > 0 else 1
    if nq == 0:
        return out
    for qpos in prange(nq, nogil=True, num_threads=nt, schedule='static'):
        out_v[qpos] = _nn_one(&px[0], &py[0], &owner[0], queries[qpos],
                              x0, y0, cell, nx, ny, &cell_start[0], &order[0])
    return out


# ---------------------------------------------------------------------------
# segment predicates
# ---------------------------------------------------------------------------

cdef inline double _orient(double ax, double ay, double bx, double by,
                           double cx, double cy) noexcept nogil:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


cdef inline bint _on_segment(double ax, double ay, double bx, double by,
                             double px_, double py_) noexcept nogil:
    cdef double lo, hi
    lo = ax if ax < bx else bx
    hi = ax if ax > bx else bx
    if px_ < lo or px_ > hi:
        return False
    lo = ay if ay < by else by
    hi = ay if ay > by else by
    return lo <= py_ <= hi


cdef bint _segments_intersect(double ax, double ay, double bx, double by,
                              double cx, double cy, double dx, double dy) noexcept nogil:
    cdef double d1 = _orient(cx, cy, dx, dy, ax, ay)
    cdef double d2 = _orient(cx, cy, dx, dy, bx, by)
    cdef double d3 = _orient(ax, ay, bx, by, cx, cy)
    cdef double d4 = _orient(ax, ay, bx, by, dx, dy)
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


cdef inline double _point_segment_d2(double px_, double py_, double ax,
                                     double ay, double bx, double by) noexcept nogil:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double l2 = dx * dx + dy * dy
    cdef double t, qx, qy, ex, ey
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


cdef double _segment_d2(double ax, double ay, double bx, double by,
                        double cx, double cy, double dx, double dy) noexcept nogil:
    cdef double best, d2
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
    return best


def segments_intersect(double ax, double ay, double bx, double by,
                       double cx, double cy, double dx, double dy):
    return _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy)


def segment_distance(double ax, double ay, double bx, double by,
                     double cx, double cy, double dx, double dy):
    if _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    return sqrt(_segment_d2(ax, ay, bx, by, cx, cy, dx, dy))


# ---------------------------------------------------------------------------
# polyline predicates
# ---------------------------------------------------------------------------

def polylines_intersect(double[::1] x1, double[::1] y1,
                        double[::1] x2, double[::1] y2):
    cdef Py_ssize_t n1 = x1.shape[0] - 1
    cdef Py_ssize_t n2 = x2.shape[0] - 1
    cdef Py_ssize_t i, j
    cdef bint hit = False
    with nogil:
        for i in range(n1):
            for j in range(n2):
                if _segments_intersect(x1[i], y1[i], x1[i + 1], y1[i + 1],
                                       x2[j], y2[j], x2[j + 1], y2[j + 1]):
                    hit = True
                    break
            if hit:
                break
    return hit


def polylines_distance(double[::1] x1, double[::1] y1,
                       double[::1] x2, double[::1] y2):
    cdef Py_ssize_t n1 = x1.shape[0] - 1
    cdef Py_ssize_t n2 = x2.shape[0] - 1
    cdef Py_ssize_t i, j
    cdef double best = INFINITY
    cdef double d2
    cdef bint hit = False
    with nogil:
        for i in range(n1):
            for j in range(n2):
                if _segments_intersect(x1[i], y1[i], x1[i + 1], y1[i + 1],
                                       x2[j], y2[j], x2[j + 1], y2[j + 1]):
                    hit = True
                    break
                d2 = _segment_d2(x1[i], y1[i], x1[i + 1], y1[i + 1],
                                 x2[j], y2[j], x2[j + 1], y2[j + 1])
                if d2 < best:
                    best = d2
            if hit:
                break
    if hit:
        return 0.0
    return sqrt(best)


cdef bint _segment_intersects_rect(double ax, double ay, double bx, double by,
                                   double minx, double miny, double maxx,
                                   double maxy) noexcept nogil:
    if minx <= ax <= maxx and miny <= ay <= maxy:
        return True
    if minx <= bx <= maxx and miny <= by <= maxy:
        return True
    if _segments_intersect(ax, ay, bx, by, minx, miny, maxx, miny):
        return True
    if _segments_intersect(ax, ay, bx, by, maxx, miny, maxx, maxy):
        return True
    if _segments_intersect(ax, ay, bx, by, maxx, maxy, minx, maxy):
        return True
    if _segments_intersect(ax, ay, bx, by, minx, maxy, minx, miny):
        return True
    return False


def polyline_rect_relation(double[::1] xs, double[::1] ys, double minx,
                           double miny, double maxx, double maxy):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i
    cdef bint inside = True
    cdef int result = 0
    with nogil:
        for i in range(n):
            if not (minx <= xs[i] <= maxx and miny <= ys[i] <= maxy):
                inside = False
                break
        if inside:
            result = 2
        else:
            for i in range(n - 1):
                if _segment_intersects_rect(xs[i], ys[i], xs[i + 1], ys[i + 1],
                                            minx, miny, maxx, maxy):
                    result = 1
                    break
    return result
