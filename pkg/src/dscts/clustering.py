"""Two-level K-means clustering of sinks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import Point, Sink


def _sq_dists(pts: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _seed_centers(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: D^2-weighted draws, uniform when all points coincide."""
    n = len(pts)
    centers = [pts[rng.integers(n)]]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers.append(pts[idx])
        d2 = np.minimum(d2, ((pts - pts[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=float)


def _repair_empty(pts: np.ndarray, labels: np.ndarray, centers: np.ndarray, k: int) -> bool:
    """Move the point farthest from its centroid into each empty cluster."""
    changed = False
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        d2 = ((pts - centers[labels]) ** 2).sum(axis=1)
        d2[counts[labels] <= 1] = -1.0  # never empty another cluster
        i = int(np.argmax(d2))
        counts[labels[i]] -= 1
        labels[i] = c
        counts[c] = 1
        centers[c] = pts[i]
        changed = True
    return changed


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    objective_trace: list[float]


def kmeans(points: Sequence[Point] | np.ndarray, k: int, seed: int = 0,
           max_iter: int = 100) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding and no empty clusters."""
    pts = np.asarray([(p.x, p.y) for p in points], dtype=float) \
        if not isinstance(points, np.ndarray) else np.asarray(points, dtype=float)
    n = len(pts)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    rng = np.random.default_rng(seed)
    centers = _seed_centers(pts, k, rng)
    labels = np.full(n, -1)
    trace: list[float] = []
    for _ in range(max_iter):
        d2 = _sq_dists(pts, centers)
        new = d2.argmin(axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        _repair_empty(pts, labels, centers, k)
        for c in range(k):
            centers[c] = pts[labels == c].mean(axis=0)
        trace.append(float(((pts - centers[labels]) ** 2).sum()))
    # final consistency: centroids are the means of the final members
    _repair_empty(pts, labels, centers, k)
    for c in range(k):
        centers[c] = pts[labels == c].mean(axis=0)
    return KMeansResult(labels, centers, trace)


@dataclass(frozen=True)
class Cluster:
    centroid: Point
    members: tuple[str, ...]
    parent: int = -1   # high-cluster index for low clusters


@dataclass(frozen=True)
class ClusterHierarchy:
    high_clusters: tuple[Cluster, ...]
    low_clusters: tuple[Cluster, ...]

    def low_of_sink(self) -> dict[str, int]:
        return {s: i for i, c in enumerate(self.low_clusters) for s in c.members}


def _centroid(pts: np.ndarray) -> Point:
    m = pts.mean(axis=0)
    return Point(float(m[0]), float(m[1]))


def dual_level_cluster(sinks: Sequence[Sink], hc: int, lc: int, seed: int = 0,
                       max_iter: int = 100) -> ClusterHierarchy:
    """High-level clusters of about ``hc`` sinks, each split into clusters of about ``lc``."""
    if not hc >= lc >= 1:
        raise ValueError("need hc >= lc >= 1")
    if not sinks:
        raise ValueError("no sinks")
    pts = np.array([(s.pos.x, s.pos.y) for s in sinks], dtype=float)
    ids = [s.id for s in sinks]
    k_high = math.ceil(len(sinks) / hc)
    top = kmeans(pts, k_high, seed=seed, max_iter=max_iter)
    highs, lows = [], []
    for h in range(k_high):
        idx = np.flatnonzero(top.labels == h)
        highs.append(Cluster(_centroid(pts[idx]), tuple(ids[i] for i in idx)))
        k_low = math.ceil(len(idx) / lc)
        sub = kmeans(pts[idx], k_low, seed=seed + 1 + h, max_iter=max_iter)
        for l in range(k_low):
            jdx = idx[sub.labels == l]
            lows.append(Cluster(_centroid(pts[jdx]), tuple(ids[j] for j in jdx), parent=h))
    return ClusterHierarchy(tuple(highs), tuple(lows))
