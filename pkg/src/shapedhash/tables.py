"""Fixed-capacity open-addressed tables with optional key shaping.

Four probe schemes are supported. With shaping off a slot holds the raw key.
With shaping on, each insert evaluates the K shaped forms of the key, places
the one whose probe sequence reaches an empty slot soonest (ties go to the
lowest tag) and records the tag next to the stored value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .keyspace import MASK64, ShapingFamily, mix64, unshape, unshape_array

SECONDARY_SALT = 0xD6E8FEB86659FD93


class CapacityError(RuntimeError):
    """No empty slot is reachable for the value being inserted."""


class ProbeScheme(str, enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    DOUBLE = "double"
    ROBINHOOD = "robinhood"

    @property
    def code(self) -> int:
        return _SCHEME_CODES[self]


_SCHEME_CODES = {
    ProbeScheme.LINEAR: kern.LINEAR,
    ProbeScheme.QUADRATIC: kern.QUADRATIC,
    ProbeScheme.DOUBLE: kern.DOUBLE,
    ProbeScheme.ROBINHOOD: kern.ROBINHOOD,
}


class LookupOrder(str, enum.Enum):
    """How a shaped lookup schedules its K candidate walks.

    SEQUENTIAL finishes each candidate's walk before starting the next.
    INTERLEAVED advances every live candidate one slot per round, so the
    stored candidate is met after at most K * displacement + tag + 1 probes.
    """

    SEQUENTIAL = "sequential"
    INTERLEAVED = "interleaved"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def home_index(stored_value: int, m: int) -> int:
    return mix64(stored_value) % m


def secondary_step(stored_value: int, m: int) -> int:
    """Double-hashing stride in [1, m-1]."""
    if m < 2:
        return 1
    return 1 + mix64((stored_value & MASK64) ^ SECONDARY_SALT) % (m - 1)


def probe_index(scheme: ProbeScheme, home: int, step: int, h2: int, m: int) -> int:
    scheme = ProbeScheme(scheme)
    if scheme is ProbeScheme.QUADRATIC:
        return (home + step * step) % m
    if scheme is ProbeScheme.DOUBLE:
        return (home + step * h2) % m
    return (home + step) % m


@dataclass(frozen=True)
class InsertStats:
    probes: int
    collided: bool
    chosen_tag: int = 0
    eval_probes: int = 0


@dataclass(frozen=True)
class LookupResult:
    found: bool
    probes: int
    tag: int | None = None


@dataclass
class BuildStats:
    """Per-insert arrays from :meth:`Table.build`."""

    probes: np.ndarray
    collided: np.ndarray
    tags: np.ndarray
    eval_probes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.probes)


def _u64(v: int) -> np.uint64:
    return np.uint64(int(v) & MASK64)


class Table:
    """Open-addressed slot array.

    ``m_requested`` is rounded up to the next prime so double hashing cycles
    through every slot and quadratic probing reaches at least half of them.
    Pass a :class:`ShapingFamily` to enable shaping.
    """

    def __init__(
        self,
        m_requested: int,
        scheme: ProbeScheme | str = ProbeScheme.LINEAR,
        family: ShapingFamily | None = None,
        lookup_order: LookupOrder | str = LookupOrder.INTERLEAVED,
    ):
        if m_requested < 1:
            raise ValueError("capacity must be >= 1")
        self.m_requested = int(m_requested)
        self.m_actual = next_prime(self.m_requested)
        self.scheme = ProbeScheme(scheme)
        self.family = family
        self.lookup_order = LookupOrder(lookup_order)
        # column 0: stored value; column 1: (displacement + 1) << 8 | tag, 0 = empty
        self.slots = np.zeros((self.m_actual, 2), dtype=np.uint64)
        self.count = 0
        self._seeds = family.seed_array() if family is not None else None

    def __len__(self) -> int:
        return self.count

    def __repr__(self) -> str:
        k = self.family.k if self.family else 0
        return (
            f"Table(scheme={self.scheme.value}, m={self.m_actual}, "
            f"count={self.count}, K={k})"
        )

    @property
    def sst_enabled(self) -> bool:
        return self.family is not None

    @property
    def occupied(self) -> np.ndarray:
        return self.slots[:, 1] != 0

    @property
    def stored(self) -> np.ndarray:
        """Stored value per slot (meaningless where empty)."""
        return self.slots[:, 0]

    @property
    def tags(self) -> np.ndarray:
        return (self.slots[:, 1] & np.uint64(0xFF)).astype(np.int64)

    @property
    def disp(self) -> np.ndarray:
        """Probe-sequence position per slot, -1 where empty."""
        return (self.slots[:, 1] >> np.uint64(8)).astype(np.int64) - 1

    @property
    def load(self) -> float:
        return self.count / self.m_actual

    def _require_shaping(self):
        if self._seeds is None:
            raise ValueError("table was built without a shaping family")

    def probe_cost(self, stored_value: int) -> int:
        """Slots inspected until the first empty one on ``stored_value``'s sequence."""
        c = kern.probe_cost(self.slots, self.scheme.code, _u64(stored_value))
        if c == kern.NO_SLOT:
            raise CapacityError("no empty slot reachable; cost undefined")
        return int(c)

    def insert_plain(self, key: int) -> InsertStats:
        if self.count >= self.m_actual:
            raise CapacityError("table is full")
        p, c = kern.insert_value(self.slots, self.scheme.code, _u64(key), 0)
        if p == kern.NO_SLOT:
            raise CapacityError(f"no reachable empty slot for key {key:#x}")
        self.count += 1
        return InsertStats(int(p), bool(c), 0)

    def insert_shaped(self, key: int) -> InsertStats:
        self._require_shaping()
        if self.count >= self.m_actual:
            raise CapacityError("table is full")
        p, c, t, e = kern.insert_shaped(self.slots, self.scheme.code, _u64(key), self._seeds)
        if p == kern.NO_SLOT:
            raise CapacityError(f"no candidate of key {key:#x} reaches an empty slot")
        self.count += 1
        return InsertStats(int(p), bool(c), int(t), int(e))

    def insert(self, key: int) -> InsertStats:
        return self.insert_shaped(key) if self.sst_enabled else self.insert_plain(key)

    def lookup_plain(self, key: int) -> LookupResult:
        found, p = kern.lookup_value(self.slots, self.scheme.code, _u64(key), 0, False, True)
        return LookupResult(bool(found), int(p), 0 if found else None)

    def lookup_shaped(self, key: int) -> LookupResult:
        self._require_shaping()
        args = (self.slots, self.scheme.code, _u64(key), self._seeds)
        if self.lookup_order is LookupOrder.INTERLEAVED:
            k = self.family.k
            found, p, t = kern.lookup_shaped_interleaved(
                *args,
                np.empty(k, np.uint64),
                np.empty(k, np.int64),
                np.empty(k, np.int64),
                np.empty(k, np.bool_),
            )
        else:
            found, p, t = kern.lookup_shaped_sequential(*args, True)
        return LookupResult(bool(found), int(p), int(t) if found else None)

    def lookup(self, key: int) -> LookupResult:
        return self.lookup_shaped(key) if self.sst_enabled else self.lookup_plain(key)

    def lookup_exhaustive(self, key: int) -> LookupResult:
        """Reference lookup that only stops at empty slots (no Robin Hood early
        exit, candidates tried in tag order). Used to cross-check results."""
        if not self.sst_enabled:
            found, p = kern.lookup_value(self.slots, self.scheme.code, _u64(key), 0, False, False)
            return LookupResult(bool(found), int(p), 0 if found else None)
        found, p, t = kern.lookup_shaped_sequential(
            self.slots, self.scheme.code, _u64(key), self._seeds, False
        )
        return LookupResult(bool(found), int(p), int(t) if found else None)

    # bulk paths ---------------------------------------------------------

    def build(self, keys) -> BuildStats:
        """Insert ``keys`` in order; raises CapacityError on the first failure
        (earlier keys stay inserted)."""
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        n = len(keys)
        probes = np.zeros(n, dtype=np.int64)
        collided = np.zeros(n, dtype=np.bool_)
        tags = np.zeros(n, dtype=np.uint8)
        evals = np.zeros(n, dtype=np.int64)
        if self.sst_enabled:
            done = kern.build_shaped(
                self.slots, self.scheme.code, keys, self._seeds, probes, collided, tags, evals
            )
        else:
            done = kern.build_plain(self.slots, self.scheme.code, keys, probes, collided)
        self.count += int(done)
        if done < n:
            raise CapacityError(
                f"insert {done} of {n} failed (count={self.count}, m={self.m_actual})"
            )
        return BuildStats(probes, collided, tags, evals)

    def lookup_many(self, queries) -> np.ndarray:
        """Probe counts for each query. Raises KeyError if any query misses."""
        queries = np.ascontiguousarray(queries, dtype=np.uint64)
        probes = np.empty(len(queries), dtype=np.int64)
        if self.sst_enabled:
            missing = kern.lookup_many_shaped(
                self.slots, self.scheme.code, queries, self._seeds,
                self.lookup_order is LookupOrder.INTERLEAVED, probes,
            )
        else:
            missing = kern.lookup_many_plain(self.slots, self.scheme.code, queries, probes)
        if missing:
            raise KeyError(f"{missing} queries not found")
        return probes

    def stored_keys(self) -> np.ndarray:
        """Original keys of all occupied slots, in slot order."""
        occ = self.occupied
        vals = self.slots[occ, 0]
        if not self.sst_enabled:
            return vals
        tags = (self.slots[occ, 1] & np.uint64(0xFF)).astype(np.int64)
        out = np.empty_like(vals)
        for t in range(self.family.k):
            sel = tags == t
            out[sel] = unshape_array(vals[sel], t, self.family)
        return out

    def original_key(self, slot: int) -> int:
        meta = int(self.slots[slot, 1])
        if meta == 0:
            raise IndexError(f"slot {slot} is empty")
        v = int(self.slots[slot, 0])
        return unshape(v, meta & 0xFF, self.family) if self.sst_enabled else v
