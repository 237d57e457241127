"""Probe histograms and structural indicators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np


class EmptyHistogramError(ValueError):
    pass


@dataclass
class ProbeHistogram:
    counts: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_samples(cls, samples) -> "ProbeHistogram":
        arr = np.asarray(samples, dtype=np.int64)
        if arr.size == 0:
            return cls()
        if arr.min() < 1:
            raise ValueError("probe counts must be >= 1")
        bins = np.bincount(arr)
        nz = np.flatnonzero(bins)
        return cls({int(v): int(bins[v]) for v in nz})

    @classmethod
    def from_weighted(cls, values, weights) -> "ProbeHistogram":
        """Histogram where ``values[i]`` occurs ``weights[i]`` times."""
        values = np.asarray(values, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.int64)
        if values.size == 0:
            return cls()
        bins = np.bincount(values, weights=weights).astype(np.int64)
        nz = np.flatnonzero(bins)
        return cls({int(v): int(bins[v]) for v in nz})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, value: int, count: int = 1) -> None:
        if value < 1:
            raise ValueError("probe counts must be >= 1")
        self.counts[value] = self.counts.get(value, 0) + count

    def merge(self, other: "ProbeHistogram") -> "ProbeHistogram":
        out = dict(self.counts)
        for v, c in other.counts.items():
            out[v] = out.get(v, 0) + c
        return ProbeHistogram(out)

    def sum(self) -> int:
        return sum(v * c for v, c in self.counts.items())

    def mean(self) -> float:
        total = self.total
        if total == 0:
            raise EmptyHistogramError("mean of an empty histogram")
        return self.sum() / total

    def max(self) -> int:
        if not self.counts:
            raise EmptyHistogramError("max of an empty histogram")
        return max(self.counts)

    def percentile(self, p: float) -> int:
        return percentile(self, p)


def percentile(hist: ProbeHistogram | Mapping[int, int], p: float) -> int:
    """Nearest-rank percentile: the smallest value whose cumulative count
    reaches ceil(p/100 * total)."""
    counts = hist.counts if isinstance(hist, ProbeHistogram) else dict(hist)
    total = sum(counts.values())
    if total < 1:
        raise EmptyHistogramError("percentile of an empty histogram")
    if not 0 < p <= 100:
        raise ValueError(f"p must be in (0, 100], got {p}")
    # integer arithmetic keeps ceil exact for p given with <= 6 decimals
    rank = max(1, -(-round(p * 1_000_000) * total // 100_000_000))
    cum = 0
    for v in sorted(counts):
        cum += counts[v]
        if cum >= rank:
            return v
    return max(counts)  # unreachable


def max_cluster(occupancy) -> int:
    """Longest circular run of occupied slots."""
    occ = np.asarray(occupancy, dtype=bool)
    m = occ.size
    if m == 0:
        return 0
    if occ.all():
        return m
    # rotate so the array starts right after an empty slot; no run then wraps
    first_empty = int(np.argmin(occ))
    rolled = np.roll(occ, -(first_empty + 1))
    padded = np.concatenate(([False], rolled, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    if starts.size == 0:
        return 0
    return int((ends - starts).max())


def analytic_collision_rate(alpha: float, k: int) -> float:
    """Expected fraction of inserts whose best candidate home is occupied,
    averaged over a fill from empty to ``alpha``: (1/alpha) * int_0^alpha t^k dt."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must be in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    return alpha**k / (k + 1)


def collision_rate(build_stats: Iterable) -> float:
    """Fraction of inserts that collided. Accepts InsertStats objects or
    a boolean array."""
    if isinstance(build_stats, np.ndarray):
        flags = build_stats.astype(bool)
    else:
        flags = np.array([bool(getattr(s, "collided", s)) for s in build_stats], dtype=bool)
    if flags.size == 0:
        raise ValueError("collision rate of an empty build")
    return float(flags.mean())


@dataclass(frozen=True)
class StructureStats:
    collisions_per_record: float
    max_cluster: int
    metadata_bits: int


def metadata_bits_for(k: int | None) -> int:
    if not k or k <= 1:
        return 0
    return math.ceil(math.log2(k))
