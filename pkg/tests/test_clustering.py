import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dscts.clustering import dual_level_cluster, kmeans
from dscts.ingest import generate_benchmark
from dscts.model import Point


def test_kmeans_single_point():
    r = kmeans([Point(3, 4)], 1)
    assert r.centers.tolist() == [[3, 4]]


def test_kmeans_symmetric_pairs():
    pts = [Point(0, 0), Point(0, 1), Point(10, 0), Point(10, 1)]
    r = kmeans(pts, 2, seed=0)
    assert r.labels[0] == r.labels[1] != r.labels[2] == r.labels[3]
    assert sorted(map(tuple, r.centers.tolist())) == [(0, 0.5), (10, 0.5)]


def test_kmeans_errors():
    with pytest.raises(ValueError):
        kmeans([Point(0, 0)], 2)
    with pytest.raises(ValueError):
        kmeans([Point(0, 0)], 1, max_iter=0)


def _objective(pts, labels, k):
    return sum(((pts[labels == c] - pts[labels == c].mean(0)) ** 2).sum()
               for c in range(k) if (labels == c).any())


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kmeans_beats_random_partitions(seed):
    rng = np.random.default_rng(100 + seed)
    pts = rng.uniform(0, 100, (300, 2))
    r = kmeans(pts, 10, seed=seed)
    ours = _objective(pts, r.labels, 10)
    for _ in range(100):
        assert ours <= _objective(pts, rng.integers(0, 10, 300), 10)


@given(st.integers(1, 120), st.integers(0, 10**6))
def test_kmeans_objective_non_increasing(n, seed):
    pts = np.random.default_rng(seed).uniform(0, 50, (n, 2))
    k = 1 + seed % n
    r = kmeans(pts, k, seed=seed)
    assert all(b <= a + 1e-9 * max(1, a) for a, b in zip(r.objective_trace, r.objective_trace[1:]))
    assert len(np.unique(r.labels)) == k  # no empty cluster


@pytest.mark.parametrize("n,n_high,n_low", [(10, 1, 1), (3000, 1, 100)])
def test_cluster_counts(n, n_high, n_low):
    inst = generate_benchmark(n, (500, 500), seed=4)
    h = dual_level_cluster(inst.sinks, 3000, 30)
    assert (len(h.high_clusters), len(h.low_clusters)) == (n_high, n_low)


def test_cluster_counts_three_high():
    inst = generate_benchmark(7000, (1000, 1000), seed=5)
    h = dual_level_cluster(inst.sinks, 3000, 30)
    assert len(h.high_clusters) == 3
    lo = math.ceil(7000 / 30)
    assert lo <= len(h.low_clusters) <= lo + 2
    for i, hc in enumerate(h.high_clusters):
        assert sum(1 for c in h.low_clusters if c.parent == i) == math.ceil(len(hc.members) / 30)


@given(st.integers(1, 400), st.integers(1, 50), st.integers(0, 1000))
def test_hierarchy_partition_and_centroids(n, lc, seed):
    hc = lc * (1 + seed % 4)
    inst = generate_benchmark(n, (200, 200), seed=seed)
    h = dual_level_cluster(inst.sinks, hc, lc, seed=seed)
    pos = {s.id: s.pos for s in inst.sinks}
    members = [m for c in h.low_clusters for m in c.members]
    assert len(members) == n and set(members) == set(pos)
    for group in (h.high_clusters, h.low_clusters):
        for c in group:
            assert c.members
            mx = np.mean([pos[m].x for m in c.members])
            my = np.mean([pos[m].y for m in c.members])
            assert abs(mx - c.centroid.x) <= 1e-9 and abs(my - c.centroid.y) <= 1e-9
    for c in h.low_clusters:
        assert set(c.members) <= set(h.high_clusters[c.parent].members)


def test_clustering_deterministic():
    inst = generate_benchmark(500, (100, 100), seed=9)
    assert dual_level_cluster(inst.sinks, 200, 30, seed=3) == dual_level_cluster(inst.sinks, 200, 30, seed=3)
