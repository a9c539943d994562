"""Conditional end-point buffer insertion that trims skew after the DP.

A buffer goes on a zero-length front-side edge directly above the root of
a low-level cluster's subtree (the routed tap nearest the cluster
centroid).  If that vertex sits on the back side, the buffer is flanked by
an nTSV on each side so the surrounding sides stay unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .clustering import ClusterHierarchy
from .model import (Assignment, ClockTree, EdgeArrays, NodeKind, Pattern, Side, Technology,
                    TreeEdge, TreeMetrics, TreeNode, ValidationError)
from .timing import TreeTiming, cap_violations, evaluate_arrays, evaluate_tree

REFINE_ORDERS = ("fastest_first", "slowest_first")


@dataclass(frozen=True)
class RefineParams:
    p: float = 23.0   # trigger: skew above p percent of latency
    m: int = 33       # cap on refined end-points

    def __post_init__(self):
        if not 0 <= self.p <= 100:
            raise ValidationError("p must lie in [0, 100]")
        if self.m < 0:
            raise ValidationError("m must be >= 0")


def _adaptive_t_exact(n_sinks: int) -> Fraction:
    x = Fraction(n_sinks, 10000)
    lo, hi = Fraction(6, 10), Fraction(1)
    t_lo, t_hi = Fraction(6, 100), Fraction(1, 10)
    if x <= lo:
        return t_lo
    if x >= hi:
        return t_hi
    return t_lo + (x - lo) * (t_hi - t_lo) / (hi - lo)


def adaptive_t(n_sinks: int) -> float:
    """Scale factor: 0.06 up to N = 6000, linear to 0.1 at N = 10000, flat after."""
    if n_sinks < 1:
        raise ValueError("need at least one sink")
    return float(_adaptive_t_exact(n_sinks))


def refine_count(n_sinks: int, m: int) -> int:
    """min(floor(N * t), m), with the product taken in exact arithmetic."""
    return min(math.floor(n_sinks * _adaptive_t_exact(n_sinks)), m)


def needs_refine(metrics: TreeMetrics, p: float) -> bool:
    return metrics.latency > 0 and metrics.skew > (p / 100.0) * metrics.latency


def cluster_roots(tree: ClockTree, hierarchy: ClusterHierarchy) -> list[int]:
    """Subtree-root node of each low-level cluster (LCA of its sinks)."""
    out = []
    for lc in hierarchy.low_clusters:
        node = tree.lca([tree.sink_node[s] for s in lc.members])
        if node == tree.root:
            node = tree.edges[tree.children[tree.root][0]].child
        out.append(node)
    return out


def select_clusters(sink_delays: dict[str, float], hierarchy: ClusterHierarchy, n: int,
                    order: str = "fastest_first") -> list[int]:
    """Low-level clusters of the first ``n`` end-points in delay order.

    End-points whose cluster is already selected are skipped, so up to ``n``
    distinct clusters come back.  Clusters are routed zero-skew internally,
    so without the skip the top end-points would nearly always collapse
    into one or two clusters.
    """
    low_of = hierarchy.low_of_sink()
    ranked = sorted(sink_delays, key=lambda s: (sink_delays[s], s),
                    reverse=(order == "slowest_first"))
    out: dict[int, None] = {}
    for s in ranked:
        if len(out) >= n:
            break
        out.setdefault(low_of[s])
    return list(out)


class _Editable:
    """Growable edge lists; cheap to copy, turned into arrays on demand."""

    def __init__(self, tree: ClockTree, pats: list[int]):
        self.nodes = [(nd.pos, nd.kind, nd.sink) for nd in tree.nodes]
        self.parent = [e.parent for e in tree.edges]
        self.child = [e.child for e in tree.edges]
        self.length = [e.length for e in tree.edges]
        self.ncap = [tree.node_cap[c] for c in self.child]
        self.pats = list(pats)
        self.pedge = list(tree.parent_edge)
        self.root = tree.root
        self.sink_of_node = {nd.id: nd.sink for nd in tree.nodes if nd.kind is NodeKind.SINK}

    def copy(self) -> "_Editable":
        new = object.__new__(_Editable)
        for k, v in self.__dict__.items():
            setattr(new, k, list(v) if isinstance(v, list) else v)
        return new

    def _add_node(self, like: int) -> int:
        self.nodes.append((self.nodes[like][0], NodeKind.INTERNAL, None))
        self.pedge.append(-1)
        return len(self.nodes) - 1

    def _add_edge(self, parent: int, child: int, pat: Pattern, ncap: float) -> None:
        self.parent.append(parent)
        self.child.append(child)
        self.length.append(0.0)
        self.ncap.append(ncap)
        self.pats.append(int(pat))
        self.pedge[child] = len(self.parent) - 1

    def insert_buffer_above(self, v: int) -> None:
        """Split the edge into ``v`` at ``v`` and put a zero-length P2 below the cut."""
        e = self.pedge[v]
        chain = [Pattern.P2]
        if Pattern(self.pats[e]).downstream_side is Side.BACK:
            chain = [Pattern.P5, Pattern.P2, Pattern.P6]
        pin = self.ncap[e]
        top = self._add_node(v)
        self.child[e] = top
        self.ncap[e] = 0.0
        self.pedge[top] = e
        for i, pat in enumerate(chain):
            last = i == len(chain) - 1
            below = v if last else self._add_node(v)
            self._add_edge(top, below, pat, pin if last else 0.0)
            top = below

    def arrays(self) -> EdgeArrays:
        return EdgeArrays.build(self.parent, self.child, self.length, self.ncap, self.root,
                                len(self.nodes), self.sink_of_node)

    def to_tree(self, sinks) -> tuple[ClockTree, Assignment]:
        nodes = tuple(TreeNode(i, pos, kind, sink) for i, (pos, kind, sink) in enumerate(self.nodes))
        edges = tuple(TreeEdge(i, p, c, L) for i, (p, c, L)
                      in enumerate(zip(self.parent, self.child, self.length)))
        return ClockTree(nodes, edges, self.root, sinks), tuple(Pattern(p) for p in self.pats)


@dataclass
class RefineReport:
    triggered: bool
    candidates: int          # end-points selected (n)
    clusters_tried: int
    inserted: int
    before: TreeMetrics
    after: TreeMetrics


def refine(tree: ClockTree, assignment: Assignment, hierarchy: ClusterHierarchy,
           params: RefineParams, tech: Technology, order: str = "fastest_first",
           timing: Optional[TreeTiming] = None, roots: Optional[list[int]] = None,
           report: Optional[list] = None) -> tuple[ClockTree, Assignment, TreeMetrics]:
    """Insert end-point buffers until skew falls under the trigger.

    End-points are ranked by arrival time (fastest first by default) and the
    first ``refine_count`` are mapped to their low-level clusters.  Each
    cluster gets one buffer, kept only if it lowers the skew and respects
    ``max_cap``.  Returns the possibly grown tree with its assignment.
    ``roots`` may carry a precomputed :func:`cluster_roots` for ``tree``.
    """
    if order not in REFINE_ORDERS:
        raise ValueError(f"order must be one of {REFINE_ORDERS}")
    timing = timing or evaluate_tree(tree, assignment, tech)
    before = timing.metrics
    if not needs_refine(before, params.p):
        if report is not None:
            report.append(RefineReport(False, 0, 0, 0, before, before))
        return tree, assignment, before
    n = refine_count(len(tree.sinks), params.m)
    clusters = select_clusters(timing.sink_delays, hierarchy, n, order)
    roots = roots if roots is not None else cluster_roots(tree, hierarchy)
    state = _Editable(tree, [int(p) for p in assignment])
    current = before
    inserted = tried = 0
    for c in clusters:
        if not needs_refine(current, params.p):
            break
        tried += 1
        trial = state.copy()
        trial.insert_buffer_above(roots[c])
        arr = trial.arrays()
        pats = np.asarray(trial.pats, dtype=np.int64)
        t = evaluate_arrays(arr, pats, tech)
        if t.metrics.skew < current.skew and not cap_violations(arr, pats, t, tech):
            state, current = trial, t.metrics
            inserted += 1
    if report is not None:
        report.append(RefineReport(True, n, tried, inserted, before, current))
    if not inserted:
        return tree, assignment, before
    new_tree, new_assignment = state.to_tree(tree.sinks)
    return new_tree, new_assignment, current
