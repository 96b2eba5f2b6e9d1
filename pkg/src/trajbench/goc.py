"""Global overlap coefficient (GOC).

A dataset maps to a graph with one node per trajectory and an edge per
pair of trajectories whose MBRs overlap; the GOC is that graph's density
2|E| / (|V|(|V|-1)).  The exact value needs all m(m-1)/2 pair tests, the
Monte Carlo estimate samples n trajectories per round and takes the
median subgraph density over p rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import Dataset
from .errors import DegenerateDataset, InvalidParams, SampleTooLarge


@dataclass(frozen=True)
class ApproxParams:
    """Sampling knobs shared by the approximate metrics."""

    n: int
    p: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParams(f"sample size n must be >= 2, got {self.n}")
        if self.p < 1:
            raise InvalidParams(f"round count p must be >= 1, got {self.p}")
        if self.seed < 0:
            raise InvalidParams("seed must be non-negative")


@dataclass(frozen=True)
class GocEstimate:
    value: float
    round_values: tuple[float, ...]
    params: ApproxParams = field(repr=False)


def lower_median(values) -> float:
    """Median as the lower-middle sorted element, so the result is always an
    actually observed value (ordinary median for odd counts)."""
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def exact_goc(ds: Dataset) -> float:
    """Exact overlap-graph density over all trajectory pairs."""
    m = len(ds)
    if m < 2:
        raise DegenerateDataset(f"GOC needs at least 2 trajectories, got {m}")
    minx, miny, maxx, maxy = ds.mbr_arrays()
    edges = int(kernels.count_overlapping_pairs(minx, miny, maxx, maxy))
    return edges / (m * (m - 1) / 2)


def approx_goc(ds: Dataset, params: ApproxParams) -> GocEstimate:
    """Median over p rounds of the exact density of an n-trajectory sample.

    Each round samples without replacement from a stream derived from
    (seed, round index), so the estimate is reproducible and independent
    of round execution order.
    """
    m = len(ds)
    if m < 2:
        raise DegenerateDataset(f"GOC needs at least 2 trajectories, got {m}")
    if params.n > m:
        raise SampleTooLarge(f"sample size {params.n} exceeds dataset size {m}")
    minx, miny, maxx, maxy = ds.mbr_arrays()
    counts = kernels.goc_round_counts(minx, miny, maxx, maxy,
                                      params.n, params.p, params.seed)
    denom = params.n * (params.n - 1) / 2
    round_values = tuple(float(c) / denom for c in np.asarray(counts))
    return GocEstimate(value=lower_median(round_values),
                       round_values=round_values, params=params)
