"""Zero-skew clock routing by deferred-merge embedding, run per hierarchy tier.

Merge regions are kept in rotated coordinates u = x + y, v = y - x, where a
Manhattan ball is an axis-aligned square and Manhattan distance is the
Chebyshev distance.  A merging segment (a 45/135 degree arc in x/y) is an
axis-aligned rectangle that is degenerate in at least one axis; carrying
general rectangles keeps the intersection arithmetic robust to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .clustering import ClusterHierarchy
from .model import (ClockTree, NodeKind, Point, Sink, Technology, TreeEdge, TreeNode,
                    manhattan)


@dataclass(frozen=True)
class MergeRegion:
    u0: float
    u1: float
    v0: float
    v1: float

    @classmethod
    def at(cls, p: Point) -> "MergeRegion":
        u, v = p.x + p.y, p.y - p.x
        return cls(u, u, v, v)

    def expand(self, r: float) -> "MergeRegion":
        return MergeRegion(self.u0 - r, self.u1 + r, self.v0 - r, self.v1 + r)

    def intersect(self, other: "MergeRegion") -> "MergeRegion":
        u0, u1 = max(self.u0, other.u0), min(self.u1, other.u1)
        v0, v1 = max(self.v0, other.v0), min(self.v1, other.v1)
        # rounding can leave a hair-thin negative width; collapse it
        if u0 > u1:
            u0 = u1 = (u0 + u1) / 2
        if v0 > v1:
            v0 = v1 = (v0 + v1) / 2
        return MergeRegion(u0, u1, v0, v1)

    def distance(self, other: "MergeRegion") -> float:
        du = max(self.u0 - other.u1, other.u0 - self.u1, 0.0)
        dv = max(self.v0 - other.v1, other.v0 - self.v1, 0.0)
        return max(du, dv)

    def nearest(self, p: Point) -> Point:
        u = min(max(p.x + p.y, self.u0), self.u1)
        v = min(max(p.y - p.x, self.v0), self.v1)
        return Point((u - v) / 2, (u + v) / 2)

    def center(self) -> Point:
        u, v = (self.u0 + self.u1) / 2, (self.v0 + self.v1) / 2
        return Point((u - v) / 2, (u + v) / 2)


@dataclass
class Subtree:
    """Routed subtree under construction.  ``pos`` is set by embedding."""

    region: MergeRegion
    pos: Optional[Point] = None
    sink: Optional[Sink] = None
    children: list[tuple["Subtree", float]] = field(default_factory=list)


@dataclass
class Tap:
    region: MergeRegion
    delay: float
    cap: float
    payload: Subtree


def sink_tap(s: Sink) -> Tap:
    region = MergeRegion.at(s.pos)
    return Tap(region, 0.0, s.cap, Subtree(region, pos=s.pos, sink=s))


def _wire_delay(r: float, c: float, length: float, load: float) -> float:
    return r * length * (c * length + load)


def _extension(r: float, c: float, target: float, load: float) -> float:
    """Length l >= 0 with r*l*(c*l + load) == target."""
    if target <= 0:
        return 0.0
    if r == 0:
        raise ValueError("cannot balance delay with zero wire resistance")
    if c == 0:
        if load == 0:
            raise ValueError("cannot balance delay with zero capacitance")
        return target / (r * load)
    # r c l^2 + r load l - target = 0, stable root form
    a, b = r * c, r * load
    disc = b * b + 4 * a * target
    return 2 * target / (b + math.sqrt(disc))


def balance(a: Tap, b: Tap, dist: float, r: float, c: float) -> tuple[float, float]:
    """Branch lengths (ea, eb) giving equal Elmore delay to both taps."""
    ca, cb, L = a.cap, b.cap, dist
    denom = r * (ca + cb + 2 * c * L)
    if denom > 0:
        x = (b.delay - a.delay + r * L * (c * L + cb)) / denom
    else:
        x = L / 2 if a.delay == b.delay else (-1.0 if a.delay > b.delay else L + 1.0)
    if 0.0 <= x <= L:
        return x, L - x
    if x < 0:
        # a is slower: tap at a, stretch b's branch
        return 0.0, max(L, _extension(r, c, a.delay - b.delay, cb))
    return max(L, _extension(r, c, b.delay - a.delay, ca)), 0.0


def zst_merge_pair(a: Tap, b: Tap, tech: Technology) -> Tap:
    """Zero-skew merge of two taps over front-side wire."""
    r, c = tech.r_front, tech.c_front
    L = a.region.distance(b.region)
    ea, eb = balance(a, b, L, r, c)
    region = a.region.expand(ea).intersect(b.region.expand(eb))
    delay = max(a.delay + _wire_delay(r, c, ea, a.cap), b.delay + _wire_delay(r, c, eb, b.cap))
    node = Subtree(region, children=[(a.payload, ea), (b.payload, eb)])
    return Tap(region, delay, c * (ea + eb) + a.cap + b.cap, node)


def _region_dists(regions: Sequence[MergeRegion]) -> np.ndarray:
    arr = np.array([(r.u0, r.u1, r.v0, r.v1) for r in regions])
    u0, u1, v0, v1 = arr.T
    du = np.maximum(np.maximum(u0[:, None] - u1[None, :], u0[None, :] - u1[:, None]), 0.0)
    dv = np.maximum(np.maximum(v0[:, None] - v1[None, :], v0[None, :] - v1[:, None]), 0.0)
    return np.maximum(du, dv)


def greedy_matching(regions: Sequence[MergeRegion]) -> list[tuple[int, int]]:
    """Greedy closest-pair matching (via repeated mutual nearest neighbours).

    At most one index is left unmatched.  Ties resolve to the lowest index.
    """
    n = len(regions)
    d = _region_dists(regions)
    np.fill_diagonal(d, np.inf)
    alive = np.ones(n, dtype=bool)
    pairs: list[tuple[int, int]] = []
    while alive.sum() > 1:
        idx = np.flatnonzero(alive)
        sub = d[np.ix_(idx, idx)]
        nn = sub.argmin(axis=1)
        mutual = nn[nn] == np.arange(len(idx))
        for i in np.flatnonzero(mutual):
            j = nn[i]
            if i < j:
                pairs.append((int(idx[i]), int(idx[j])))
                alive[idx[i]] = alive[idx[j]] = False
    pairs.sort(key=lambda ij: (d[ij], ij))
    return pairs


def _embed(root: Subtree, at: Point) -> None:
    """Top-down: each unplaced node goes to the point of its region nearest its parent."""
    if root.pos is None:
        root.pos = root.region.nearest(at)
    stack = [root]
    while stack:
        node = stack.pop()
        for child, _ in node.children:
            if child.pos is None:
                child.pos = child.region.nearest(node.pos)
                stack.append(child)


def dme_route(taps: Sequence[Tap], root_hint: Optional[Point], tech: Technology) -> Tap:
    """Matching-based DME over ``taps``; returns the embedded subtree's tap.

    The returned tap sits at a single point (its embedded root) so it can be
    used as a leaf by the next tier.
    """
    if not taps:
        raise ValueError("no taps to route")
    if len(taps) == 1:
        return taps[0]
    level = list(taps)
    while len(level) > 1:
        pairs = greedy_matching([t.region for t in level])
        used = {i for ij in pairs for i in ij}
        nxt = []
        for i, j in pairs:
            nxt.append(zst_merge_pair(level[i], level[j], tech))
        nxt.extend(level[i] for i in range(len(level)) if i not in used)
        level = nxt
    top = level[0]
    _embed(top.payload, root_hint if root_hint is not None else top.region.center())
    placed = MergeRegion.at(top.payload.pos)
    top.payload.region = placed
    return Tap(placed, top.delay, top.cap, top.payload)


def route_flat(sinks: Sequence[Sink], root_pos: Point, tech: Technology) -> ClockTree:
    """Matching-based DME over all sinks at once, without any hierarchy."""
    top = dme_route([sink_tap(s) for s in sinks], root_pos, tech)
    return build_clock_tree(top.payload, root_pos, sinks)


def hierarchical_route(sinks: Sequence[Sink], root_pos: Point, hierarchy: ClusterHierarchy,
                       tech: Technology) -> ClockTree:
    """Sinks -> low-cluster roots -> high-cluster roots -> clock root."""
    by_id = {s.id: s for s in sinks}
    low_taps: dict[int, list[Tap]] = {}
    for lc in hierarchy.low_clusters:
        tap = dme_route([sink_tap(by_id[s]) for s in lc.members], lc.centroid, tech)
        low_taps.setdefault(lc.parent, []).append(tap)
    high_taps = []
    for h, hcl in enumerate(hierarchy.high_clusters):
        high_taps.append(dme_route(low_taps[h], hcl.centroid, tech))
    top = dme_route(high_taps, root_pos, tech)
    return build_clock_tree(top.payload, root_pos, sinks)


def build_clock_tree(top: Subtree, root_pos: Point, sinks: Sequence[Sink]) -> ClockTree:
    """Number the embedded subtree and attach the clock root by one edge."""
    nodes = [TreeNode(0, root_pos, NodeKind.ROOT)]
    edges: list[TreeEdge] = []

    def add(sub: Subtree) -> int:
        nid = len(nodes)
        if sub.sink is not None:
            nodes.append(TreeNode(nid, sub.pos, NodeKind.SINK, sub.sink.id))
        else:
            nodes.append(TreeNode(nid, sub.pos, NodeKind.INTERNAL))
        return nid

    top_id = add(top)
    edges.append(TreeEdge(0, 0, top_id, manhattan(root_pos, top.pos)))
    stack = [(top, top_id)]
    while stack:
        sub, sid = stack.pop()
        for child, length in sub.children:
            cid = add(child)
            # embedding is exact up to rounding; never record less than the span
            edges.append(TreeEdge(len(edges), sid, cid, max(length, manhattan(sub.pos, child.pos))))
            stack.append((child, cid))
    return ClockTree(tuple(nodes), tuple(edges), 0, tuple(sinks))
