"""Incremental back-side flows built on a front-side buffered tree.

Each baseline first synthesizes a purely front-side buffered tree (wires
and buffers only, then skew refinement) and afterwards moves a chosen set
of nets to the back side:

* latency-driven: every net on the way from the clock root down to the
  low-level cluster roots,
* fanout-driven: nets driving at least ``F`` sinks,
* criticality-driven: the trunk part of the root-to-sink paths of the
  slowest ``ceil(q * N)`` sinks.

A flipped wire keeps its length.  A flipped buffered net is cut at the
buffer, so both halves run on the back side while the buffer stays on the
front.  Back-side vertices appear wherever every incident piece is a
flipped wire, which coalesces facing nTSV pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .ingest import Instance
from .model import (Assignment, ClockTree, InsertMode, NodeKind, Pattern, Point, Side,
                    Technology, TreeEdge, TreeMetrics, TreeNode, ValidationError)
from .pipeline import Routed, RunConfig, RunResult, insert_and_refine, modes_for, route_instance
from .timing import evaluate_tree


@dataclass(frozen=True)
class LatencyDriven:
    label: str = "latency"


@dataclass(frozen=True)
class FanoutDriven:
    F: float

    def __post_init__(self):
        if not self.F >= 0:
            raise ValidationError("F must be >= 0")

    @property
    def label(self) -> str:
        F = "inf" if math.isinf(self.F) else f"{self.F:g}"
        return f"fanout:{F}"


@dataclass(frozen=True)
class CriticalityDriven:
    q: float

    def __post_init__(self):
        if not 0 < self.q <= 1:
            raise ValidationError("q must lie in (0, 1]")

    @property
    def label(self) -> str:
        return f"critical:{self.q:g}"


FlipSpec = Union[LatencyDriven, FanoutDriven, CriticalityDriven]


def parse_baseline(text: str) -> FlipSpec:
    """``latency``, ``fanout:F`` or ``critical:q``."""
    name, _, arg = text.partition(":")
    if name == "latency" and not arg:
        return LatencyDriven()
    if name == "fanout" and arg:
        return FanoutDriven(float(arg))
    if name == "critical" and arg:
        return CriticalityDriven(float(arg))
    raise ValueError(f"unknown baseline {text!r}")


def buffered_clock_tree(routed: Routed, config: RunConfig = RunConfig()) -> RunResult:
    """Front-side-only synthesis: patterns P1 and P2 everywhere, then refinement."""
    return insert_and_refine(routed, (InsertMode.FRONT_ONLY,) * len(routed.tree.edges), config)


def trunk_edges(tree: ClockTree, cluster_roots: Sequence[int]) -> set[int]:
    """Edges on the way from the clock root to any low-level cluster root."""
    out: set[int] = set()
    for node in cluster_roots:
        eid = tree.parent_edge[node]
        while eid != -1 and eid not in out:
            out.add(eid)
            eid = tree.parent_edge[tree.edges[eid].parent]
    return out


def flip_set(tree: ClockTree, assignment: Assignment, spec: FlipSpec,
             cluster_roots: Sequence[int], tech: Technology) -> set[int]:
    """Edges to move to the back side.  Zero-length edges carry no wire and stay."""
    if isinstance(spec, LatencyDriven):
        chosen = trunk_edges(tree, cluster_roots)
    elif isinstance(spec, FanoutDriven):
        chosen = {e for e, fo in enumerate(tree.fanout) if fo >= spec.F}
    elif isinstance(spec, CriticalityDriven):
        delays = evaluate_tree(tree, assignment, tech).sink_delays
        k = math.ceil(spec.q * len(tree.sinks))
        worst = sorted(delays, key=lambda s: (-delays[s], s))[:k]
        paths = {e for s in worst for e in tree.path_edges(tree.sink_node[s])}
        chosen = paths & trunk_edges(tree, cluster_roots)
    else:
        raise TypeError(f"unknown flip spec {spec!r}")
    return {e for e in chosen if tree.edges[e].length > 0}


_WIRE_PATTERN = {(Side.FRONT, Side.FRONT): Pattern.P4, (Side.BACK, Side.BACK): Pattern.P3,
                 (Side.BACK, Side.FRONT): Pattern.P5, (Side.FRONT, Side.BACK): Pattern.P6}


def apply_flip(tree: ClockTree, assignment: Assignment,
               flipped: set[int]) -> tuple[ClockTree, Assignment]:
    """Move the wires of ``flipped`` to the back side, splitting buffered nets."""
    if any(p not in (Pattern.P1, Pattern.P2) for p in assignment):
        raise ValidationError("flip baselines need a front-side assignment (P1/P2 only)")
    nodes = list(tree.nodes)
    edges: list[list] = [[e.parent, e.child, e.length] for e in tree.edges]
    pats: list[Optional[Pattern]] = list(assignment)
    back_wire = [False] * len(edges)

    def new_node(pos: Point) -> int:
        nodes.append(TreeNode(len(nodes), pos, NodeKind.INTERNAL))
        return len(nodes) - 1

    for eid in sorted(flipped):
        u, v, L = edges[eid]
        if assignment[eid] is Pattern.P1:
            back_wire[eid] = True
            continue
        pu, pv = tree.nodes[u].pos, tree.nodes[v].pos
        mid = Point((pu.x + pv.x) / 2, (pu.y + pv.y) / 2)
        a, b = new_node(mid), new_node(mid)
        edges[eid] = [u, a, L / 2]
        back_wire[eid] = True
        edges.append([a, b, 0.0])
        pats.append(Pattern.P2)
        back_wire.append(False)
        edges.append([b, v, L / 2])
        pats.append(None)
        back_wire.append(True)
    # a vertex goes to the back side when every piece touching it is a back wire
    touches_front = [False] * len(nodes)
    touches_front[tree.root] = True
    for nd in nodes:
        if nd.kind is NodeKind.SINK:
            touches_front[nd.id] = True
    for i, (u, v, _) in enumerate(edges):
        if not back_wire[i]:
            touches_front[u] = touches_front[v] = True
    side = [Side.FRONT if f else Side.BACK for f in touches_front]
    for i, (u, v, _) in enumerate(edges):
        if back_wire[i]:
            pats[i] = _WIRE_PATTERN[(side[u], side[v])]
    new_tree = ClockTree(tuple(nodes),
                         tuple(TreeEdge(i, u, v, L) for i, (u, v, L) in enumerate(edges)),
                         tree.root, tree.sinks)
    return new_tree, tuple(pats)  # type: ignore[arg-type]


def flip_to_backside(tree: ClockTree, assignment: Assignment, spec: FlipSpec,
                     cluster_roots: Sequence[int],
                     tech: Technology) -> tuple[ClockTree, Assignment, TreeMetrics]:
    chosen = flip_set(tree, assignment, spec, cluster_roots, tech)
    if not chosen:
        return tree, assignment, evaluate_tree(tree, assignment, tech).metrics
    new_tree, new_assignment = apply_flip(tree, assignment, chosen)
    return new_tree, new_assignment, evaluate_tree(new_tree, new_assignment, tech).metrics


@dataclass
class CompareRow:
    label: str
    tree: ClockTree
    assignment: Assignment
    metrics: TreeMetrics


def compare(instance: Instance, specs: Sequence[FlipSpec], config: RunConfig = RunConfig(),
            routed: Optional[Routed] = None) -> list[CompareRow]:
    """Buffered tree, each flip baseline, then the concurrent pipeline, on one routing."""
    routed = routed or route_instance(instance, config)
    tech = instance.tech
    buffered = buffered_clock_tree(routed, config)
    rows = [CompareRow("buffered", buffered.tree, buffered.assignment, buffered.metrics)]
    # cluster roots are stable under refinement: buffers go above them
    roots = routed.cluster_roots
    for spec in specs:
        t, a, m = flip_to_backside(buffered.tree, buffered.assignment, spec, roots, tech)
        rows.append(CompareRow(spec.label, t, a, m))
    concurrent = insert_and_refine(routed, modes_for(routed.tree, config), config)
    rows.append(CompareRow("concurrent", concurrent.tree, concurrent.assignment,
                           concurrent.metrics))
    return rows
