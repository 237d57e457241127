"""Reversible 64-bit key shaping.

A shaping family holds K seeded bijections on 64-bit integers. Transform i
XORs the key with seed i and then runs the SplitMix64 finalizer, which is
invertible: each xor-shift can be unfolded and each odd multiplier has an
inverse modulo 2**64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

MIX_MUL1 = 0xBF58476D1CE4E5B9
MIX_MUL2 = 0x94D049BB133111EB
MIX_MUL1_INV = pow(MIX_MUL1, -1, 1 << 64)
MIX_MUL2_INV = pow(MIX_MUL2, -1, 1 << 64)


class ShapingError(ValueError):
    """Raised for a tag outside the family's range."""


def mix64(v: int) -> int:
    """SplitMix64 finalizer on a Python int (taken mod 2**64)."""
    v &= MASK64
    v ^= v >> 30
    v = (v * MIX_MUL1) & MASK64
    v ^= v >> 27
    v = (v * MIX_MUL2) & MASK64
    v ^= v >> 31
    return v


def _unxorshift(y: int, s: int) -> int:
    x = y
    for _ in range(64 // s + 1):
        x = y ^ (x >> s)
    return x


def unmix64(v: int) -> int:
    """Exact inverse of :func:`mix64`."""
    v &= MASK64
    v = _unxorshift(v, 31)
    v = (v * MIX_MUL2_INV) & MASK64
    v = _unxorshift(v, 27)
    v = (v * MIX_MUL1_INV) & MASK64
    v = _unxorshift(v, 30)
    return v


def default_seeds(k: int) -> list[int]:
    return [((i + 1) * GOLDEN_GAMMA) & MASK64 for i in range(k)]


def metadata_bits(k: int) -> int:
    """Bits needed to store a tag for order ``k`` (0 for k <= 1)."""
    return math.ceil(math.log2(k)) if k > 1 else 0


@dataclass(frozen=True)
class ShapingFamily:
    k: int
    seeds: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"shaping order must be >= 1, got {self.k}")
        if not self.seeds:
            object.__setattr__(self, "seeds", tuple(default_seeds(self.k)))
        if len(self.seeds) != self.k:
            raise ValueError(f"expected {self.k} seeds, got {len(self.seeds)}")
        if len(set(self.seeds)) != self.k:
            raise ValueError("seeds must be pairwise distinct")
        object.__setattr__(self, "seeds", tuple(int(s) & MASK64 for s in self.seeds))

    @property
    def metadata_bits(self) -> int:
        return metadata_bits(self.k)

    def seed_array(self) -> np.ndarray:
        return np.array(self.seeds, dtype=np.uint64)

    def _check(self, tag: int) -> None:
        if not 0 <= tag < self.k:
            raise ShapingError(f"tag {tag} out of range for K={self.k}")


def shape(key: int, tag: int, family: ShapingFamily) -> int:
    family._check(tag)
    return mix64((key & MASK64) ^ family.seeds[tag])


def unshape(shaped: int, tag: int, family: ShapingFamily) -> int:
    family._check(tag)
    return unmix64(shaped) ^ family.seeds[tag]


def candidates(key: int, family: ShapingFamily) -> list[int]:
    """All K shaped forms of ``key``, in ascending tag order."""
    return [shape(key, i, family) for i in range(family.k)]


# Vectorised forms. numpy uint64 arithmetic wraps mod 2**64.

_U = np.uint64


def _mix_array(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    v ^= v >> _U(30)
    v *= _U(MIX_MUL1)
    v ^= v >> _U(27)
    v *= _U(MIX_MUL2)
    v ^= v >> _U(31)
    return v


def _unxorshift_array(y: np.ndarray, s: int) -> np.ndarray:
    x = y.copy()
    for _ in range(64 // s + 1):
        x = y ^ (x >> _U(s))
    return x


def mix64_array(values) -> np.ndarray:
    return _mix_array(np.asarray(values, dtype=np.uint64))


def shape_array(keys, tag: int, family: ShapingFamily) -> np.ndarray:
    family._check(tag)
    return _mix_array(np.asarray(keys, dtype=np.uint64) ^ _U(family.seeds[tag]))


def unshape_array(shaped, tag: int, family: ShapingFamily) -> np.ndarray:
    family._check(tag)
    v = np.asarray(shaped, dtype=np.uint64)
    v = _unxorshift_array(v, 31)
    v = v * _U(MIX_MUL2_INV)
    v = _unxorshift_array(v, 27)
    v = v * _U(MIX_MUL1_INV)
    v = _unxorshift_array(v, 30)
    return v ^ _U(family.seeds[tag])
