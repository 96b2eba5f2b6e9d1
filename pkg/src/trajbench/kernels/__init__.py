"""Hot-kernel facade.

Selects the compiled extension when available, otherwise the numpy
fallback.  ``TRAJBENCH_PURE_PYTHON=1`` forces the fallback.  Both
implementations return identical results; ``benchmarks/kernel_benchmark.py``
compares their speed.
"""

from __future__ import annotations

import os

from . import pure

if os.environ.get("TRAJBENCH_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
    _impl = pure
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pure

IMPLEMENTATION: str = _impl.IMPLEMENTATION

TAG_GOC: int = pure.TAG_GOC
TAG_ANN: int = pure.TAG_ANN

_num_threads = max(1, int(os.environ.get("TRAJBENCH_THREADS", os.cpu_count() or 1)))


def set_num_threads(n: int) -> None:
    """Thread count for parallel kernels; results are identical for any
    value."""
    global _num_threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _num_threads = n


def get_num_threads() -> int:
    return _num_threads


def sample_indices(total, n, seed, tag, round_index):
    return _impl.sample_indices(total, n, seed, tag, round_index)


def count_overlapping_pairs(minx, miny, maxx, maxy):
    return _impl.count_overlapping_pairs(minx, miny, maxx, maxy)


def goc_round_counts(minx, miny, maxx, maxy, n, p, seed):
    return _impl.goc_round_counts(minx, miny, maxx, maxy, n, p, seed,
                                  threads=_num_threads)


def nn_foreign_distances(px, py, owner, queries, x0, y0, cell, nx, ny,
                         cell_start, order):
    return _impl.nn_foreign_distances(px, py, owner, queries, x0, y0, cell,
                                      nx, ny, cell_start, order,
                                      threads=_num_threads)


def segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
    return _impl.segments_intersect(ax, ay, bx, by, cx, cy, dx, dy)


def segment_distance(ax, ay, bx, by, cx, cy, dx, dy):
    return _impl.segment_distance(ax, ay, bx, by, cx, cy, dx, dy)


def polylines_intersect(x1, y1, x2, y2):
    return _impl.polylines_intersect(x1, y1, x2, y2)


def polylines_distance(x1, y1, x2, y2):
    return _impl.polylines_distance(x1, y1, x2, y2)


def polyline_rect_relation(xs, ys, minx, miny, maxx, maxy):
    return _impl.polyline_rect_relation(xs, ys, minx, miny, maxx, maxy)
