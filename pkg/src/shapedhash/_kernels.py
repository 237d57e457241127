"""numba kernels behind :mod:`shapedhash.tables` and :mod:`shapedhash.workload`.

Slots live in one (m, 2) uint64 array so a probe touches one cache line:
column 0 holds the stored value, column 1 packs ``(displacement + 1) << 8 | tag``
with 0 marking an empty slot. All uint64 arithmetic is kept in uint64
explicitly; mixing signed and unsigned operands makes numba promote to float64.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LINEAR = 0
QUADRATIC = 1
DOUBLE = 2
ROBINHOOD = 3

NO_SLOT = -1

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S8 = np.uint64(8)
_TAG_MASK = np.uint64(0xFF)
_EMPTY = np.uint64(0)
_SECONDARY_SALT = np.uint64(0xD6E8FEB86659FD93)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True, inline="always")
def fmix(v):
    v = v ^ (v >> _S30)
    v = v * _M1
    v = v ^ (v >> _S27)
    v = v * _M2
    v = v ^ (v >> _S31)
    return v


@njit(cache=True, inline="always")
def home_of(v, m):
    return np.int64(fmix(v) % np.uint64(m))


@njit(cache=True, inline="always")
def step_of(v, m):
    if m < 2:
        return np.int64(1)
    return np.int64(1) + np.int64(fmix(v ^ _SECONDARY_SALT) % np.uint64(m - 1))


@njit(cache=True, inline="always")
def advance(scheme, pos, i, step, m):
    """Slot at sequence step i given the slot at step i - 1 (no division)."""
    if scheme == QUADRATIC:
        pos += 2 * i - 1
    elif scheme == DOUBLE:
        pos += step
    else:
        pos += 1
    while pos >= m:
        pos -= m
    return pos


@njit(cache=True, inline="always")
def pack(disp, tag):
    return (np.uint64(disp + 1) << _S8) | np.uint64(tag)


@njit(cache=True, inline="always")
def disp_of(meta):
    return np.int64(meta >> _S8) - 1


@njit(cache=True, inline="always")
def tag_of(meta):
    return np.int64(meta & _TAG_MASK)


@njit(cache=True)
def probe_cost(slots, scheme, v):
    """Slots inspected up to and including the first empty one, or NO_SLOT."""
    m = slots.shape[0]
    h = home_of(v, m)
    st = step_of(v, m) if scheme == DOUBLE else np.int64(1)
    pos = h
    for i in range(m):
        if i:
            pos = advance(scheme, pos, i, st, m)
        if slots[pos, 1] == _EMPTY:
            return i + 1
    return NO_SLOT


@njit(cache=True)
def insert_value(slots, scheme, v, tag):
    """Place ``v`` with ``tag``. Returns (probes, collided); probes is NO_SLOT
    when the probe sequence reaches no empty slot (table left unchanged)."""
    m = slots.shape[0]
    h = home_of(v, m)
    if scheme == ROBINHOOD:
        # caller guarantees at least one empty slot
        collided = slots[h, 1] != _EMPTY
        pos = h
        d = np.int64(0)
        cur_v = v
        cur_t = np.int64(tag)
        probes = 0
        while True:
            probes += 1
            meta = slots[pos, 1]
            if meta == _EMPTY:
                slots[pos, 0] = cur_v
                slots[pos, 1] = pack(d, cur_t)
                return probes, collided
            rd = disp_of(meta)
            if rd < d:
                sv = slots[pos, 0]
                slots[pos, 0] = cur_v
                slots[pos, 1] = pack(d, cur_t)
                cur_v = sv
                cur_t = tag_of(meta)
                d = rd
            pos += 1
            if pos == m:
                pos = 0
            d += 1
    st = step_of(v, m) if scheme == DOUBLE else np.int64(1)
    pos = h
    for i in range(m):
        if i:
            pos = advance(scheme, pos, i, st, m)
        if slots[pos, 1] == _EMPTY:
            slots[pos, 0] = v
            slots[pos, 1] = pack(np.int64(i), np.int64(tag))
            return i + 1, i > 0
    return NO_SLOT, True


@njit(cache=True)
def lookup_value(slots, scheme, v, tag, check_tag, early_exit):
    """Walk ``v``'s sequence. Returns (found, probes). ``early_exit`` enables
    the Robin Hood displacement cut-off."""
    m = slots.shape[0]
    h = home_of(v, m)
    st = step_of(v, m) if scheme == DOUBLE else np.int64(1)
    pos = h
    for i in range(m):
        if i:
            pos = advance(scheme, pos, i, st, m)
        meta = slots[pos, 1]
        if meta == _EMPTY:
            return False, i + 1
        if early_exit and scheme == ROBINHOOD and disp_of(meta) < i:
            return False, i + 1
        if slots[pos, 0] == v and (not check_tag or tag_of(meta) == tag):
            return True, i + 1
    return False, m


@njit(cache=True)
def insert_shaped(slots, scheme, key, seeds):
    """Min-cost candidate placement. Returns (probes, collided, tag, eval_probes);
    probes is NO_SLOT when no candidate reaches an empty slot."""
    m = slots.shape[0]
    k = seeds.shape[0]
    best = NO_SLOT
    best_tag = 0
    best_v = np.uint64(0)
    eval_probes = 0
    for t in range(k):
        v = fmix(key ^ seeds[t])
        c = probe_cost(slots, scheme, v)
        eval_probes += c if c != NO_SLOT else m
        if c != NO_SLOT and (best == NO_SLOT or c < best):
            best = c
            best_tag = t
            best_v = v
            if c == 1:
                # a free home slot cannot be beaten by a later tag
                break
    if best == NO_SLOT:
        return NO_SLOT, True, 0, eval_probes
    probes, collided = insert_value(slots, scheme, best_v, best_tag)
    return probes, collided, best_tag, eval_probes


@njit(cache=True)
def lookup_shaped_sequential(slots, scheme, key, seeds, early_exit):
    """Try tags 0..K-1 one after another. Returns (found, probes, tag)."""
    k = seeds.shape[0]
    total = 0
    for t in range(k):
        v = fmix(key ^ seeds[t])
        found, p = lookup_value(slots, scheme, v, t, True, early_exit)
        total += p
        if found:
            return True, total, t
    return False, total, -1


@njit(cache=True)
def lookup_shaped_interleaved(slots, scheme, key, seeds, vals, homes, steps, active):
    """Advance all K candidate walks one slot per round, tags ascending
    within a round. Scratch arrays have length >= K; ``homes`` tracks each
    walk's current slot. Returns (found, probes, tag)."""
    m = slots.shape[0]
    k = seeds.shape[0]
    total = 0
    # round 0 inline: most keys sit at home under their first few tags
    alive = 0
    for t in range(k):
        v = fmix(key ^ seeds[t])
        h = home_of(v, m)
        total += 1
        meta = slots[h, 1]
        if meta == _EMPTY:
            active[t] = False
            continue
        if slots[h, 0] == v and tag_of(meta) == t:
            return True, total, t
        vals[t] = v
        homes[t] = h
        steps[t] = step_of(v, m) if scheme == DOUBLE else np.int64(1)
        active[t] = True
        alive += 1
    for i in range(1, m):
        if alive == 0:
            break
        for t in range(k):
            if not active[t]:
                continue
            pos = advance(scheme, homes[t], i, steps[t], m)
            homes[t] = pos
            total += 1
            meta = slots[pos, 1]
            if meta == _EMPTY or (scheme == ROBINHOOD and disp_of(meta) < i):
                active[t] = False
                alive -= 1
            elif slots[pos, 0] == vals[t] and tag_of(meta) == t:
                return True, total, t
    return False, total, -1


# batch drivers -------------------------------------------------------------


@njit(cache=True)
def occupied_count(slots):
    c = 0
    for j in range(slots.shape[0]):
        if slots[j, 1] != _EMPTY:
            c += 1
    return c


@njit(cache=True)
def build_plain(slots, scheme, keys, probes_out, collided_out):
    """Insert keys in order. Returns the number inserted (< len on failure)."""
    m = slots.shape[0]
    count = occupied_count(slots)
    for n in range(keys.shape[0]):
        if count >= m:
            return n
        p, c = insert_value(slots, scheme, keys[n], 0)
        if p == NO_SLOT:
            return n
        probes_out[n] = p
        collided_out[n] = c
        count += 1
    return keys.shape[0]


@njit(cache=True)
def build_shaped(slots, scheme, keys, seeds, probes_out, collided_out, tag_out, eval_out):
    m = slots.shape[0]
    count = occupied_count(slots)
    for n in range(keys.shape[0]):
        if count >= m:
            return n
        p, c, t, e = insert_shaped(slots, scheme, keys[n], seeds)
        eval_out[n] = e
        if p == NO_SLOT:
            return n
        probes_out[n] = p
        collided_out[n] = c
        tag_out[n] = t
        count += 1
    return keys.shape[0]


@njit(cache=True)
def lookup_many_plain(slots, scheme, queries, probes_out):
    """Returns the number of queries not found."""
    missing = 0
    for q in range(queries.shape[0]):
        found, p = lookup_value(slots, scheme, queries[q], 0, False, True)
        probes_out[q] = p
        if not found:
            missing += 1
    return missing


@njit(cache=True)
def lookup_many_shaped(slots, scheme, queries, seeds, interleaved, probes_out):
    k = seeds.shape[0]
    vals = np.empty(k, dtype=np.uint64)
    homes = np.empty(k, dtype=np.int64)
    steps = np.empty(k, dtype=np.int64)
    active = np.empty(k, dtype=np.bool_)
    missing = 0
    for q in range(queries.shape[0]):
        if interleaved:
            found, p, t = lookup_shaped_interleaved(
                slots, scheme, queries[q], seeds, vals, homes, steps, active
            )
        else:
            found, p, t = lookup_shaped_sequential(slots, scheme, queries[q], seeds, True)
        probes_out[q] = p
        if not found:
            missing += 1
    return missing


# workload streams ----------------------------------------------------------


@njit(cache=True)
def stream(seed, n):
    """fmix(seed + j*gamma) for j in [0, n)."""
    out = np.empty(n, dtype=np.uint64)
    x = seed
    for j in range(n):
        out[j] = fmix(x)
        x = x + _GAMMA
    return out


@njit(cache=True)
def uniform_indices(seed, n_keys, q):
    out = np.empty(q, dtype=np.int64)
    x = seed
    nk = np.uint64(n_keys)
    for j in range(q):
        out[j] = np.int64(fmix(x) % nk)
        x = x + _GAMMA
    return out


@njit(cache=True)
def hotspot_indices(seed, n_keys, n_hot, hot_weight, q):
    """Two stream draws per query: a Bernoulli on the top 53 bits, then an index."""
    out = np.empty(q, dtype=np.int64)
    x = seed
    hot = np.uint64(n_hot)
    cold = np.uint64(n_keys - n_hot)
    scale = 1.0 / 9007199254740992.0
    for j in range(q):
        u = np.float64(fmix(x) >> _S11) * scale
        x = x + _GAMMA
        r = fmix(x)
        x = x + _GAMMA
        if u < hot_weight or n_keys == n_hot:
            out[j] = np.int64(r % hot)
        else:
            out[j] = n_hot + np.int64(r % cold)
    return out
