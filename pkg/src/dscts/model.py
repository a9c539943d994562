"""Domain types shared across the double-side CTS pipeline.

Units throughout: micrometers, femtofarads, kilo-ohms, picoseconds
(kOhm * fF = ps, so no conversion factors appear anywhere).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np


class ValidationError(ValueError):
    """Raised when an input or intermediate structure breaks an invariant."""


class ConnectivityError(ValidationError):
    """Two edges meeting at a vertex disagree on the vertex side."""

    def __init__(self, node: int, message: str):
        super().__init__(f"node {node}: {message}")
        self.node = node


class InfeasibleError(RuntimeError):
    """No legal solution exists under the capacitance limit."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"non-finite point ({self.x}, {self.y})")


def manhattan(a: Point, b: Point) -> float:
    return abs(a.x - b.x) + abs(a.y - b.y)


@dataclass(frozen=True)
class Sink:
    id: str
    pos: Point
    cap: float

    def __post_init__(self):
        if not self.id or any(ch.isspace() for ch in self.id) or "," in self.id:
            raise ValidationError(f"bad sink id {self.id!r}")
        if not (self.cap >= 0.0) or not math.isfinite(self.cap):
            raise ValidationError(f"sink {self.id}: negative or non-finite cap {self.cap}")


@dataclass(frozen=True)
class Technology:
    """Electrical parameters of both metal stacks, the nTSV and the buffer.

    Defaults: front side is M3 and back side is BM1-BM3 of the ASAP7-based
    layer table; nTSV is 0.020 kOhm / 0.004 fF.  The buffer numbers are a
    plausible single-size clock buffer, not taken from a library.
    """

    r_front: float = 0.024222
    c_front: float = 0.12918
    r_back: float = 0.000384
    c_back: float = 0.116264
    r_ntsv: float = 0.020
    c_ntsv: float = 0.004
    buf_in_cap: float = 0.6
    buf_delay_const: float = 10.0
    buf_drive_res: float = 0.3
    max_cap: float = 60.0

    def __post_init__(self):
        for name in self.field_names():
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise ValidationError(f"technology field {name} must be finite and >= 0, got {v!r}")

    @staticmethod
    def field_names() -> tuple[str, ...]:
        return tuple(Technology.__dataclass_fields__)


class Side(IntEnum):
    FRONT = 0
    BACK = 1

    @property
    def letter(self) -> str:
        return "F" if self is Side.FRONT else "B"


F, B = Side.FRONT, Side.BACK


class Pattern(IntEnum):
    P1 = 1
    P2 = 2
    P3 = 3
    P4 = 4
    P5 = 5
    P6 = 6

    @property
    def wire_side(self) -> Side:
        return _PATTERN_TABLE[self][0]

    @property
    def upstream_side(self) -> Side:
        return _PATTERN_TABLE[self][1]

    @property
    def downstream_side(self) -> Side:
        return _PATTERN_TABLE[self][2]

    @property
    def n_buffers(self) -> int:
        return _PATTERN_TABLE[self][3]

    @property
    def n_ntsvs(self) -> int:
        return _PATTERN_TABLE[self][4]


# wire side, upstream side, downstream side, buffers, nTSVs
_PATTERN_TABLE = {
    Pattern.P1: (F, F, F, 0, 0),
    Pattern.P2: (F, F, F, 1, 0),  # buffer at the edge midpoint
    Pattern.P3: (B, B, B, 0, 0),
    Pattern.P4: (B, F, F, 0, 2),  # nTSV at both ends
    Pattern.P5: (B, B, F, 0, 1),  # nTSV at the sink-side end
    Pattern.P6: (B, F, B, 0, 1),  # nTSV at the root-side end
}

PATTERNS: tuple[Pattern, ...] = tuple(Pattern)


class InsertMode(Enum):
    FULL = "full"
    INTRA_SIDE = "intra"
    # front-side wires and buffers only; used by the buffered-tree baseline
    FRONT_ONLY = "front-only"

    @property
    def patterns(self) -> frozenset[Pattern]:
        return _MODE_PATTERNS[self]


_MODE_PATTERNS = {
    InsertMode.FULL: frozenset(PATTERNS),
    InsertMode.INTRA_SIDE: frozenset({Pattern.P1, Pattern.P2, Pattern.P3}),
    InsertMode.FRONT_ONLY: frozenset({Pattern.P1, Pattern.P2}),
}

LEAF_PATTERNS = frozenset({Pattern.P1, Pattern.P2, Pattern.P4, Pattern.P5})


class NodeKind(Enum):
    ROOT = "root"
    INTERNAL = "internal"
    SINK = "sink"


@dataclass(frozen=True)
class TreeNode:
    id: int
    pos: Point
    kind: NodeKind
    sink: Optional[str] = None


@dataclass(frozen=True)
class TreeEdge:
    id: int
    parent: int
    child: int
    length: float


# edge id -> pattern; edge ids are 0..n_edges-1 so a tuple indexed by id is the map
Assignment = tuple[Pattern, ...]


@dataclass(frozen=True, eq=True)
class ClockTree:
    """Routed clock tree.  Node and edge ids equal their list positions."""

    nodes: tuple[TreeNode, ...]
    edges: tuple[TreeEdge, ...]
    root: int
    sinks: tuple[Sink, ...] = field(default=())

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        n = len(self.nodes)
        for i, nd in enumerate(self.nodes):
            if nd.id != i:
                raise ValidationError(f"node at position {i} has id {nd.id}")
        if not 0 <= self.root < n or self.nodes[self.root].kind is not NodeKind.ROOT:
            raise ValidationError(f"root {self.root} is not a root node")
        sink_ids = {s.id for s in self.sinks}
        if len(sink_ids) != len(self.sinks):
            raise ValidationError("duplicate sink ids")
        parent_of = [-1] * n
        for i, e in enumerate(self.edges):
            if e.id != i:
                raise ValidationError(f"edge at position {i} has id {e.id}")
            if not (0 <= e.parent < n and 0 <= e.child < n):
                raise ValidationError(f"edge {e.id} references a missing node")
            if parent_of[e.child] != -1:
                raise ValidationError(f"node {e.child} has two parents")
            if e.child == self.root:
                raise ValidationError("root cannot have a parent")
            need = manhattan(self.nodes[e.parent].pos, self.nodes[e.child].pos)
            if not e.length >= need * (1 - 1e-12) - 1e-9:
                raise ValidationError(f"edge {e.id} shorter than its Manhattan span")
            parent_of[e.child] = e.id
        if len(self.edges) != n - 1:
            raise ValidationError("edge count must be node count - 1")
        seen_sinks = set()
        for nd in self.nodes:
            if nd.id != self.root and parent_of[nd.id] == -1:
                raise ValidationError(f"node {nd.id} is disconnected")
            nch = len(self.children[nd.id])
            if nd.kind is NodeKind.SINK:
                if nch:
                    raise ValidationError(f"sink node {nd.id} has children")
                if nd.sink not in sink_ids:
                    raise ValidationError(f"node {nd.id} refers to unknown sink {nd.sink!r}")
                seen_sinks.add(nd.sink)
            elif nch == 0 or nch > 2:
                raise ValidationError(f"node {nd.id} has {nch} children")
        if seen_sinks != sink_ids:
            raise ValidationError("leaves are not exactly the sinks")
        if len(self.postorder) != len(self.edges):
            raise ValidationError("tree contains a cycle")

    # ---- derived structure, cached --------------------------------------

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        """Outgoing edge ids per node, in edge-id order."""
        out: list[list[int]] = [[] for _ in self.nodes]
        for e in self.edges:
            out[e.parent].append(e.id)
        return tuple(tuple(c) for c in out)

    @cached_property
    def parent_edge(self) -> tuple[int, ...]:
        pe = [-1] * len(self.nodes)
        for e in self.edges:
            pe[e.child] = e.id
        return tuple(pe)

    @cached_property
    def postorder(self) -> tuple[int, ...]:
        """Edge ids, children before parents."""
        order: list[int] = []
        stack = [(eid, False) for eid in reversed(self.children[self.root])]
        seen = 0
        while stack:
            eid, expanded = stack.pop()
            if expanded:
                order.append(eid)
                continue
            seen += 1
            if seen > len(self.edges):
                break
            stack.append((eid, True))
            for c in reversed(self.children[self.edges[eid].child]):
                stack.append((c, False))
        return tuple(order)

    @cached_property
    def sink_caps(self) -> dict[str, float]:
        return {s.id: s.cap for s in self.sinks}

    @cached_property
    def node_cap(self) -> tuple[float, ...]:
        """Pin capacitance sitting directly on each node (sink cap or 0)."""
        caps = self.sink_caps
        return tuple(caps[nd.sink] if nd.kind is NodeKind.SINK else 0.0 for nd in self.nodes)

    @cached_property
    def fanout(self) -> tuple[int, ...]:
        """Downstream sink count per edge."""
        fo = [0] * len(self.edges)
        for eid in self.postorder:
            child = self.edges[eid].child
            if self.nodes[child].kind is NodeKind.SINK:
                fo[eid] = 1
            else:
                fo[eid] = sum(fo[c] for c in self.children[child])
        return tuple(fo)

    @cached_property
    def sink_node(self) -> dict[str, int]:
        return {nd.sink: nd.id for nd in self.nodes if nd.kind is NodeKind.SINK}

    @cached_property
    def arrays(self) -> "EdgeArrays":
        return EdgeArrays.from_tree(self)

    def is_leaf_edge(self, eid: int) -> bool:
        return self.nodes[self.edges[eid].child].kind is NodeKind.SINK

    def is_binary(self) -> bool:
        """Every internal node has two children; the root has one or two."""
        for nd in self.nodes:
            nch = len(self.children[nd.id])
            if nd.kind is NodeKind.INTERNAL and nch != 2:
                return False
            if nd.kind is NodeKind.ROOT and nch not in (1, 2):
                return False
        return True

    def path_edges(self, node: int) -> list[int]:
        """Edge ids from the root down to ``node``."""
        path = []
        eid = self.parent_edge[node]
        while eid != -1:
            path.append(eid)
            eid = self.parent_edge[self.edges[eid].parent]
        path.reverse()
        return path

    def lca(self, nodes: Sequence[int]) -> int:
        """Lowest common ancestor of a nonempty node set."""
        paths = [[self.root] + [self.edges[e].child for e in self.path_edges(n)] for n in nodes]
        common = self.root
        for level in zip(*paths):
            if all(v == level[0] for v in level):
                common = level[0]
            else:
                break
        return common

    def total_length(self) -> float:
        return sum(e.length for e in self.edges)


@dataclass(frozen=True)
class EdgeArrays:
    """Flat per-edge view of a tree for vectorized evaluation.

    ``levels`` groups edge ids by depth, deepest first, so a level only
    depends on levels before it.  ``sink_of_node`` maps sink node id to
    sink id.
    """

    parent: np.ndarray
    child: np.ndarray
    length: np.ndarray
    ncap: np.ndarray           # pin cap at each edge's child node
    kid0: np.ndarray           # first/second child edge of the child node, -1 if none
    kid1: np.ndarray
    levels: tuple[np.ndarray, ...]
    root_kids: np.ndarray
    n_nodes: int
    sink_of_node: dict
    sink_child: np.ndarray     # edge ends at a sink
    parent_edge: np.ndarray    # per node, -1 at the root

    @staticmethod
    def build(parent, child, length, ncap, root: int, n_nodes: int,
              sink_of_node: dict) -> "EdgeArrays":
        parent = np.asarray(parent, dtype=np.int64)
        child = np.asarray(child, dtype=np.int64)
        E = len(parent)
        # children of every node in edge-id order (CSR by parent)
        by_parent = np.argsort(parent, kind="stable")
        count = np.bincount(parent, minlength=n_nodes)
        if E and count.max() > 2:
            bad = int(np.argmax(count))
            raise ValidationError(f"node {bad} has {count[bad]} children")
        start = np.concatenate(([0], np.cumsum(count)[:-1]))
        first = np.full(n_nodes, -1, dtype=np.int64)
        second = np.full(n_nodes, -1, dtype=np.int64)
        has1, has2 = count >= 1, count >= 2
        first[has1] = by_parent[start[has1]]
        second[has2] = by_parent[start[has2] + 1]
        kid0, kid1 = first[child], second[child]
        # breadth-first depth of every edge
        depth = np.zeros(E, dtype=np.int64)
        root_kids = by_parent[start[root]:start[root] + count[root]]
        frontier = root_kids
        d = 0
        while len(frontier):
            depth[frontier] = d
            nxt = np.concatenate((kid0[frontier], kid1[frontier]))
            frontier = nxt[nxt >= 0]
            d += 1
        order = np.argsort(-depth, kind="stable")
        cuts = np.flatnonzero(np.diff(depth[order])) + 1
        levels = tuple(np.split(order, cuts)) if E else ()
        sink_nodes = np.fromiter(sink_of_node, dtype=np.int64, count=len(sink_of_node))
        is_sink = np.zeros(n_nodes, dtype=bool)
        is_sink[sink_nodes] = True
        parent_edge = np.full(n_nodes, -1, dtype=np.int64)
        parent_edge[child] = np.arange(E)
        return EdgeArrays(parent, child, np.asarray(length, dtype=float),
                          np.asarray(ncap, dtype=float), kid0, kid1, levels,
                          np.sort(root_kids), n_nodes, sink_of_node, is_sink[child], parent_edge)

    @staticmethod
    def from_tree(tree: "ClockTree") -> "EdgeArrays":
        parent = [e.parent for e in tree.edges]
        child = [e.child for e in tree.edges]
        return EdgeArrays.build(parent, child, [e.length for e in tree.edges],
                                [tree.node_cap[c] for c in child], tree.root, len(tree.nodes),
                                {nd.id: nd.sink for nd in tree.nodes if nd.kind is NodeKind.SINK})


def node_sides(tree: ClockTree, assignment: Sequence[Pattern]) -> list[Side]:
    """Side of every vertex implied by the assignment; raises on conflicts.

    The root is fixed Front (the clock source is a front-side pin) and every
    sink is Front.
    """
    if len(assignment) != len(tree.edges):
        raise ValidationError(
            f"assignment covers {len(assignment)} edges, tree has {len(tree.edges)}")
    sides: list[Optional[Side]] = [None] * len(tree.nodes)
    sides[tree.root] = Side.FRONT
    for nd in tree.nodes:
        if nd.kind is NodeKind.SINK:
            sides[nd.id] = Side.FRONT
    for e in tree.edges:
        p = assignment[e.id]
        for node, side, what in ((e.parent, p.upstream_side, "upstream"),
                                 (e.child, p.downstream_side, "downstream")):
            have = sides[node]
            if have is None:
                sides[node] = side
            elif have is not side:
                kind = tree.nodes[node].kind
                reason = {NodeKind.ROOT: "root must be Front",
                          NodeKind.SINK: "sink-adjacent edge must end Front"}.get(kind, "side mismatch")
                raise ConnectivityError(
                    node, f"{reason}: edge {e.id} ({p.name}) puts its {what} end on "
                          f"{side.name}, vertex is {have.name}")
    return sides  # type: ignore[return-value]


def check_connectivity(tree: ClockTree, assignment: Sequence[Pattern]) -> None:
    node_sides(tree, assignment)


def is_valid_assignment(tree: ClockTree, assignment: Sequence[Pattern]) -> bool:
    try:
        node_sides(tree, assignment)
    except ValidationError:
        return False
    return True


@dataclass(frozen=True)
class TreeMetrics:
    latency: float
    skew: float
    wl_front: float
    wl_back: float
    n_buffers: int
    n_ntsvs: int

    @property
    def wirelength(self) -> float:
        return self.wl_front + self.wl_back
