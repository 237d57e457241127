"""Deterministic key sets and query streams.

Every draw comes from the stream ``mix64(seed + j * GOLDEN_GAMMA)`` for
j = 0, 1, 2, ..., so the same spec yields bit-identical keys and queries on
any platform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .keyspace import GOLDEN_GAMMA, MASK64

QUERY_SALT = 0xA5A5A5A5A5A5A5A5


class QueryMode(str, enum.Enum):
    UNIFORM = "uniform"
    HOTSPOT = "hotspot"


@dataclass(frozen=True)
class WorkloadSpec:
    m_requested: int
    load_factor: float
    query_multiplier: int = 1
    mode: QueryMode = QueryMode.UNIFORM
    seed: int = 0
    hot_fraction: float = 0.10
    hot_weight: float = 0.90

    def __post_init__(self):
        object.__setattr__(self, "mode", QueryMode(self.mode))
        if not 0 < self.load_factor <= 1:
            raise ValueError(f"load factor must be in (0, 1], got {self.load_factor}")
        if self.query_multiplier < 1:
            raise ValueError("query multiplier must be >= 1")
        if not 0 < self.hot_fraction < 1 or not 0 < self.hot_weight < 1:
            raise ValueError("hot_fraction and hot_weight must lie in (0, 1)")

    @property
    def n_keys(self) -> int:
        # tolerate float noise such as 0.95 * 5000 = 4749.999...
        return int(math.floor(self.load_factor * self.m_requested + 1e-9))

    @property
    def n_queries(self) -> int:
        return self.query_multiplier * self.n_keys

    def with_seed(self, seed: int) -> "WorkloadSpec":
        return WorkloadSpec(
            self.m_requested, self.load_factor, self.query_multiplier, self.mode,
            seed, self.hot_fraction, self.hot_weight,
        )


def key_stream(seed: int, n: int) -> np.ndarray:
    return kern.stream(np.uint64(seed & MASK64), n)


def gen_keys(spec: WorkloadSpec) -> np.ndarray:
    """First ``n_keys`` distinct values of the seed's stream, in stream order."""
    n = spec.n_keys
    if n == 0:
        return np.empty(0, dtype=np.uint64)
    want = n + 16
    while True:
        raw = key_stream(spec.seed, want)
        _, first = np.unique(raw, return_index=True)
        if len(first) >= n:
            first.sort()
            return raw[first[:n]]
        want *= 2


def hot_set_size(spec: WorkloadSpec, n_keys: int) -> int:
    return min(n_keys, max(1, math.ceil(spec.hot_fraction * n_keys - 1e-9)))


def gen_query_indices(spec: WorkloadSpec, n_keys: int) -> np.ndarray:
    """Indices into the key set for the ``query_multiplier * n_keys`` queries."""
    if n_keys < 1:
        raise ValueError("cannot draw queries from an empty key set")
    q = spec.query_multiplier * n_keys
    seed = np.uint64((spec.seed ^ QUERY_SALT) & MASK64)
    if spec.mode is QueryMode.UNIFORM:
        return kern.uniform_indices(seed, n_keys, q)
    return kern.hotspot_indices(seed, n_keys, hot_set_size(spec, n_keys), spec.hot_weight, q)


def gen_queries(spec: WorkloadSpec, keys: np.ndarray) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.uint64)
    return keys[gen_query_indices(spec, len(keys))]


__all__ = [
    "GOLDEN_GAMMA",
    "QueryMode",
    "WorkloadSpec",
    "gen_keys",
    "gen_queries",
    "gen_query_indices",
    "hot_set_size",
    "key_stream",
]
