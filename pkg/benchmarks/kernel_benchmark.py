#!/usr/bin/env python3
"""Compare the compiled kernels against the pure numpy fallback.

Both implementations return identical results; this script measures the
speed difference on the hot paths.  Run after an editable install:

    python benchmarks/kernel_benchmark.py [--quick]
"""

import argparse
import math
import time

import numpy as np

import trajbench.kernels.pure as pure

try:
    import trajbench.kernels._native as native
except ImportError:
    native = None


def timed(fn, *args, repeat=5, **kwargs):
    best = math.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, result


def make_rects(rng, m, side=0.02):
    minx = rng.uniform(0, 1, m)
    miny = rng.uniform(0, 1, m)
    return (minx, miny, minx + rng.uniform(0, side, m),
            miny + rng.uniform(0, side, m))


def make_cloud(rng, n, owners):
    px = rng.uniform(0, 1, n)
    py = rng.uniform(0, 1, n)
    owner = rng.integers(0, owners, n).astype(np.int64)
    area = (px.max() - px.min()) * (py.max() - py.min())
    cell = 0.5 / math.sqrt(n / area)
    x0, y0 = px.min(), py.min()
    nx = max(1, math.ceil((px.max() - x0) / cell))
    ny = max(1, math.ceil((py.max() - y0) / cell))
    ix = np.minimum(((px - x0) / cell).astype(np.int64), nx - 1)
    iy = np.minimum(((py - y0) / cell).astype(np.int64), ny - 1)
    cid = iy * nx + ix
    order = np.argsort(cid, kind="stable").astype(np.int64)
    cs = np.zeros(nx * ny + 1, np.int64)
    np.cumsum(np.bincount(cid, minlength=nx * ny), out=cs[1:])
    return px, py, owner, x0, y0, cell, nx, ny, cs, order


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()

    if native is None:
        print("compiled kernels not available; build with "
              "`pip install -e . --no-build-isolation` first")
        return 1

    import trajbench.kernels as facade
    if args.threads:
        facade.set_num_threads(args.threads)
    threads = facade.get_num_threads()

    rng = np.random.default_rng(7)
    scale = 0.25 if args.quick else 1.0
    m_rects = int(4000 * scale)
    n_points = int(120000 * scale)
    n_queries = int(8000 * scale)
    goc_rounds = int(200 * scale)

    rows = []

    rects = make_rects(rng, m_rects)
    tp, rp = timed(pure.count_overlapping_pairs, *rects)
    tn, rn = timed(native.count_overlapping_pairs, *rects)
    assert rp == rn
    rows.append((f"pair count (m={m_rects})", tp, tn))

    tp, rp = timed(pure.goc_round_counts, *rects, 100, goc_rounds, 11)
    tn, rn = timed(native.goc_round_counts, *rects, 100, goc_rounds, 11,
                   threads=threads)
    assert np.array_equal(rp, rn)
    rows.append((f"sampled densities (n=100, p={goc_rounds})", tp, tn))

    cloud = make_cloud(rng, n_points, owners=max(2, n_points // 11))
    queries = np.arange(n_queries, dtype=np.int64)
    tp, rp = timed(pure.nn_foreign_distances, *cloud[:3], queries, *cloud[3:],
                   repeat=2)
    tn, rn = timed(native.nn_foreign_distances, *cloud[:3], queries, *cloud[3:],
                   threads=threads, repeat=5)
    assert np.array_equal(rp, rn)
    rows.append((f"grid NN ({n_queries} queries over {n_points} pts)", tp, tn))

    pairs = []
    for _ in range(int(400 * scale)):
        x1 = np.cumsum(rng.uniform(-0.01, 0.01, 11)) + rng.uniform(0, 1)
        y1 = np.cumsum(rng.uniform(-0.01, 0.01, 11)) + rng.uniform(0, 1)
        x2 = np.cumsum(rng.uniform(-0.01, 0.01, 11)) + rng.uniform(0, 1)
        y2 = np.cumsum(rng.uniform(-0.01, 0.01, 11)) + rng.uniform(0, 1)
        pairs.append((x1, y1, x2, y2))

    def all_distances(impl):
        return [impl.polylines_distance(*p) for p in pairs]

    tp, rp = timed(all_distances, pure, repeat=2)
    tn, rn = timed(all_distances, native, repeat=5)
    assert rp == rn
    rows.append((f"polyline distance ({len(pairs)} pairs)", tp, tn))

    print(f"\nkernel benchmark ({threads} thread(s) for parallel kernels)\n")
    print(f"{'kernel':<45} {'pure':>10} {'native':>10} {'speedup':>8}")
    for name, tp, tn in rows:
        print(f"{name:<45} {tp * 1e3:>8.2f}ms {tn * 1e3:>8.2f}ms {tp / tn:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
