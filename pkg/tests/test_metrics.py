import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shapedhash.metrics import (
    EmptyHistogramError,
    ProbeHistogram,
    analytic_collision_rate,
    collision_rate,
    max_cluster,
    percentile,
)
from shapedhash.tables import InsertStats

hists = st.dictionaries(st.integers(1, 300), st.integers(1, 50), min_size=1, max_size=20)


@pytest.mark.parametrize(
    "counts, p, expected",
    [
        ({1: 100}, 99, 1),
        ({1: 99, 100: 1}, 99, 1),
        ({1: 99, 100: 1}, 100, 100),
        ({1: 50, 2: 30, 5: 20}, 95, 5),
        ({1: 50, 2: 30, 5: 20}, 50, 1),
        ({1: 50, 2: 30, 5: 20}, 80, 2),
        ({1: 50, 2: 30, 5: 20}, 80.5, 5),
    ],
)
def test_percentile_examples(counts, p, expected):
    assert percentile(ProbeHistogram(counts), p) == expected


def test_percentile_errors():
    with pytest.raises(EmptyHistogramError):
        percentile(ProbeHistogram(), 50)
    with pytest.raises(ValueError):
        percentile(ProbeHistogram({1: 1}), 0)


def _nearest_rank(samples, p):
    s = sorted(samples)
    return s[max(1, math.ceil(p / 100 * len(s))) - 1]


@given(hists, st.sampled_from([1, 10, 25, 50, 90, 95, 99, 99.9, 100]))
def test_percentile_matches_sorted_oracle(counts, p):
    samples = [v for v, c in counts.items() for _ in range(c)]
    h = ProbeHistogram(counts)
    assert h.percentile(p) == _nearest_rank(samples, p)
    assert h.percentile(p) in counts


@given(hists)
def test_percentile_monotone(counts):
    h = ProbeHistogram(counts)
    ps = [1, 5, 50, 90, 95, 99, 100]
    vals = [h.percentile(p) for p in ps]
    assert vals == sorted(vals)


@given(hists)
def test_histogram_mean(counts):
    h = ProbeHistogram(counts)
    assert h.total == sum(counts.values())
    assert h.mean() == sum(v * c for v, c in counts.items()) / h.total


def test_histogram_builders():
    h = ProbeHistogram.from_samples([1, 1, 3, 2, 3, 3])
    assert h.counts == {1: 2, 2: 1, 3: 3}
    w = ProbeHistogram.from_weighted([1, 3, 2], [2, 3, 1])
    assert w.counts == h.counts
    assert ProbeHistogram.from_samples([]).total == 0
    with pytest.raises(ValueError):
        ProbeHistogram.from_samples([0, 1])
    assert h.merge(w).total == 12
    with pytest.raises(EmptyHistogramError):
        ProbeHistogram().mean()


def _max_cluster_oracle(occ):
    m = len(occ)
    if all(occ):
        return m
    best = 0
    for start in range(m):
        run = 0
        while run < m and occ[(start + run) % m]:
            run += 1
        best = max(best, run)
    return best


def test_max_cluster_examples():
    assert max_cluster(np.zeros(10, bool)) == 0
    occ = np.zeros(10, bool)
    occ[[9, 0, 1]] = True
    assert max_cluster(occ) == 3
    assert max_cluster(np.ones(7, bool)) == 7
    assert max_cluster([]) == 0
    assert max_cluster([True, False, True, True, False]) == 2


@given(st.lists(st.booleans(), min_size=1, max_size=60), st.integers(0, 59))
def test_max_cluster_oracle_and_rotation(occ, shift):
    assert max_cluster(occ) == _max_cluster_oracle(occ)
    assert max_cluster(np.roll(occ, shift)) == max_cluster(occ)


def test_analytic_collision_rate():
    assert analytic_collision_rate(0.95, 1) == pytest.approx(0.475)
    assert analytic_collision_rate(0.95, 4) == pytest.approx(0.1629, abs=5e-5)
    assert analytic_collision_rate(0.95, 8) == pytest.approx(0.0737, abs=5e-5)
    assert analytic_collision_rate(0.0, 3) == 0.0
    with pytest.raises(ValueError):
        analytic_collision_rate(1.5, 1)
    with pytest.raises(ValueError):
        analytic_collision_rate(0.5, 0)


@pytest.mark.parametrize("alpha, k", [(0.95, 1), (0.9, 2), (0.75, 4), (0.95, 8)])
def test_analytic_rate_is_fill_trajectory_average(alpha, k):
    # midpoint quadrature of (1/alpha) * int_0^alpha t^k dt
    n = 100_000
    t = (np.arange(n) + 0.5) / n * alpha
    assert analytic_collision_rate(alpha, k) == pytest.approx(np.mean(t**k), rel=1e-6)


def test_collision_rate():
    assert collision_rate([InsertStats(1, False)] * 3) == 0.0
    stats = [InsertStats(2, True)] + [InsertStats(1, False)] * 3
    assert collision_rate(stats) == 0.25
    assert collision_rate(np.array([True, False])) == 0.5
    with pytest.raises(ValueError):
        collision_rate([])
