"""Concurrent buffer / nTSV insertion by multi-objective dynamic programming.

One DP node per clock-tree edge.  Bottom-up, every node merges the candidate
sets of its (up to two) child nodes on a shared vertex side, tries every
allowed pattern whose downstream side matches, and prunes.  Candidates are
stored per upstream side as parallel numpy arrays; each candidate keeps the
pattern it chose and the indices of the child candidates it merged, so the
top-down pass is a plain walk over those links.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .model import (LEAF_PATTERNS, PATTERNS, Assignment, ClockTree, InfeasibleError,
                    InsertMode, NodeKind, Pattern, Side, Technology, TreeMetrics,
                    ValidationError)
from .timing import buffer_load, evaluate_tree, pattern_electrical

SIDES = (Side.FRONT, Side.BACK)

ModeConfig = Sequence[InsertMode]  # indexed by edge id


def uniform_modes(tree: ClockTree, mode: InsertMode) -> tuple[InsertMode, ...]:
    return (mode,) * len(tree.edges)


# ---------------------------------------------------------------------------
# DP tree


@dataclass(frozen=True)
class DPNode:
    edge: int
    mode: InsertMode
    length: float
    is_leaf: bool
    children: tuple["DPNode", ...] = ()


def build_dp_tree(tree: ClockTree, modes: ModeConfig) -> DPNode:
    """Mirror the clock tree's edge adjacency as a tree of DP nodes."""
    if len(modes) != len(tree.edges):
        raise ValidationError("mode config must cover every edge")
    root_edges = tree.children[tree.root]
    if len(root_edges) != 1:
        raise ValidationError("DP needs a single clock-root edge")
    built: dict[int, DPNode] = {}
    for eid in tree.postorder:
        e = tree.edges[eid]
        kids = tree.children[e.child]
        if len(kids) > 2:
            raise ValidationError(f"node {e.child} is not binary")
        built[eid] = DPNode(edge=eid, mode=modes[eid], length=e.length,
                            is_leaf=tree.nodes[e.child].kind is NodeKind.SINK,
                            children=tuple(built.pop(c) for c in kids))
    return built[root_edges[0]]


def allowed_patterns(node: DPNode) -> frozenset[Pattern]:
    allowed = node.mode.patterns
    if node.is_leaf:
        allowed = allowed & LEAF_PATTERNS
    return allowed


# ---------------------------------------------------------------------------
# candidate sets


@dataclass
class CandSet:
    """Candidates sharing one upstream side, as parallel arrays.

    ``ia``/``ib`` index the first/second child's candidate arrays on the
    side of the shared vertex (the downstream side of ``pat``); -1 when the
    child does not exist.
    """

    cap: np.ndarray
    delay: np.ndarray
    nb: np.ndarray
    nn: np.ndarray
    pat: np.ndarray
    ia: np.ndarray
    ib: np.ndarray

    def __len__(self) -> int:
        return len(self.cap)

    @classmethod
    def empty(cls) -> "CandSet":
        f = np.empty(0)
        i = np.empty(0, dtype=np.int64)
        return cls(f, f, i, i, np.empty(0, dtype=np.int8), i, i)

    def take(self, idx) -> "CandSet":
        return CandSet(self.cap[idx], self.delay[idx], self.nb[idx], self.nn[idx],
                       self.pat[idx], self.ia[idx], self.ib[idx])

    @classmethod
    def concat(cls, parts: Sequence["CandSet"]) -> "CandSet":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        if len(parts) == 1:
            return parts[0]
        return cls(*(np.concatenate([getattr(p, f) for p in parts])
                     for f in ("cap", "delay", "nb", "nn", "pat", "ia", "ib")))


@dataclass
class Merged:
    """Partial solutions at a shared vertex, before this node's pattern."""

    cap: np.ndarray
    delay: np.ndarray
    nb: np.ndarray
    nn: np.ndarray
    ia: np.ndarray
    ib: np.ndarray

    def __len__(self) -> int:
        return len(self.cap)


@dataclass(frozen=True)
class Candidate:
    """One solution at a DP node, materialized for callers."""

    upstream_side: Side
    eff_cap: float
    max_delay: float
    n_buffers: int
    n_ntsvs: int
    pattern: Pattern
    edge: int
    index: int

    def key(self) -> tuple:
        return (int(self.upstream_side), self.eff_cap, self.max_delay, self.n_buffers, self.n_ntsvs)


NodeSets = dict  # Side -> CandSet


def _front_pairs(slow_delay: np.ndarray, fast: "CandSet", fast_counts: Sequence[np.ndarray],
                 strict: bool) -> tuple[np.ndarray, np.ndarray]:
    """Pairs (i, j) where ``fast[j]`` is no slower than row i's delay and is
    not beaten in (cap, counts) by another such member of ``fast``.

    Any other pairing with a no-slower partner is weakly dominated by one of
    these, so the merge can skip it.  ``strict`` makes "no slower" mean
    strictly faster (used for the mirrored direction so ties count once).
    """
    m = len(fast)
    order = np.lexsort((np.arange(m), fast.delay))
    d = fast.delay[order]
    keys = [fast.cap[order]] + [c[order] for c in fast_counts]
    le = np.ones((m, m), dtype=bool)          # le[t, u]: row u <= row t everywhere
    eq = np.ones((m, m), dtype=bool)
    for k in keys:
        le &= k[None, :] <= k[:, None]
        eq &= k[None, :] == k[:, None]
    beats = le & (~eq | (np.arange(m)[None, :] < np.arange(m)[:, None]))
    np.fill_diagonal(beats, False)
    death = np.where(beats.any(axis=1), beats.argmax(axis=1), m)
    prefix = np.searchsorted(d, slow_delay, side="left" if strict else "right")
    t = np.arange(m)
    ok = (t[None, :] < prefix[:, None]) & (prefix[:, None] <= death[None, :])
    i, tt = np.nonzero(ok)
    return i, order[tt]


def merge_children(kids: Sequence[NodeSets], base_cap: float = 0.0,
                   counts=None) -> dict[Side, Merged]:
    """Combine child candidates that agree on the side of the shared vertex.

    ``base_cap`` is pin capacitance on the vertex itself (sink cap at leaves).
    With no children the single partial solution is the bare pin.  Without
    ``counts`` two children give the full Cartesian product; with it
    (a function CandSet -> count columns used for dominance) only pairs that
    can survive pruning are formed.
    """
    out = {}
    if not kids:
        z = np.zeros(1, dtype=np.int64)
        m1 = np.full(1, -1, dtype=np.int64)
        out[Side.FRONT] = Merged(np.full(1, base_cap), np.zeros(1), z, z, m1, m1)
        return out
    for s in SIDES:
        a = kids[0].get(s)
        if a is None or not len(a):
            continue
        if len(kids) == 1:
            ia = np.arange(len(a), dtype=np.int64)
            out[s] = Merged(base_cap + a.cap, a.delay, a.nb, a.nn, ia,
                            np.full(len(a), -1, dtype=np.int64))
            continue
        b = kids[1].get(s)
        if b is None or not len(b):
            continue
        if counts is None:
            ia = np.repeat(np.arange(len(a), dtype=np.int64), len(b))
            ib = np.tile(np.arange(len(b), dtype=np.int64), len(a))
        else:
            i1, j1 = _front_pairs(a.delay, b, counts(b), strict=False)
            j2, i2 = _front_pairs(b.delay, a, counts(a), strict=True)
            ia = np.concatenate((i1, i2)).astype(np.int64)
            ib = np.concatenate((j1, j2)).astype(np.int64)
        cap = base_cap + a.cap[ia] + b.cap[ib]
        out[s] = Merged(cap, np.maximum(a.delay[ia], b.delay[ib]),
                        a.nb[ia] + b.nb[ib], a.nn[ia] + b.nn[ib], ia, ib)
    return out


def _prune_merged(m: Merged, counts) -> Merged:
    """Dominance-prune partial solutions before any pattern is applied.

    Every pattern maps (cap, delay) monotonically, so a dominated partial
    solution stays dominated whichever pattern is put on top of it.
    """
    if len(m) < 2:
        return m
    keep = pareto_indices(m.cap, m.delay, counts(m))
    if len(keep) == len(m):
        return m
    return Merged(m.cap[keep], m.delay[keep], m.nb[keep], m.nn[keep], m.ia[keep], m.ib[keep])


def insert_patterns(node: DPNode, merged: Mapping[Side, Merged],
                    tech: Technology) -> dict[Side, CandSet]:
    """Apply every allowed pattern to every compatible merged solution.

    A buffered pattern is skipped when its buffer would drive more than
    ``max_cap``.
    """
    parts: dict[Side, list[CandSet]] = {s: [] for s in SIDES}
    allowed = allowed_patterns(node)
    for p in PATTERNS:
        if p not in allowed:
            continue
        m = merged.get(p.downstream_side)
        if m is None or not len(m):
            continue
        cap, d = pattern_electrical(p, node.length, m.cap, tech)
        cap = np.broadcast_to(np.asarray(cap, dtype=float), m.cap.shape)
        delay = d + m.delay
        nb, nn = m.nb + p.n_buffers, m.nn + p.n_ntsvs
        ia, ib = m.ia, m.ib
        if p.n_buffers:
            ok = buffer_load(p, node.length, m.cap, tech) <= tech.max_cap
            if not ok.all():
                cap, delay, nb, nn, ia, ib = cap[ok], delay[ok], nb[ok], nn[ok], ia[ok], ib[ok]
        parts[p.upstream_side].append(
            CandSet(cap, delay, nb, nn, np.full(len(delay), int(p), dtype=np.int8), ia, ib))
    return {s: CandSet.concat(parts[s]) for s in SIDES}


def _dominated_sorted(delay: np.ndarray, counts: Sequence[np.ndarray]) -> np.ndarray:
    """Rows are sorted by cap (ties by delay, then counts).  Flag each row
    weakly dominated by an earlier row: earlier means cap <=, so it is enough
    to find an earlier row with delay <= and every count <=.  Exact
    duplicates after the first are flagged too.

    Rows are grouped by their count vector; for each group the running
    minimum delay over rows of all count-wise smaller-or-equal groups is a
    cumulative min, so the whole test is O(groups * rows).
    """
    n = len(delay)
    if n < 2:
        return np.zeros(n, dtype=bool)
    if not counts:
        prev = np.minimum.accumulate(delay)
        return np.concatenate(([False], prev[:-1] <= delay[1:]))
    if n <= 400:
        # direct test: le[i, j] = row j <= row i in delay and every count
        le = delay[None, :] <= delay[:, None]
        for c in counts:
            le &= c[None, :] <= c[:, None]
        return np.tril(le, -1).any(axis=1)
    if len(counts) == 1:
        keys = counts[0][:, None]
        uniq, g = np.unique(counts[0], return_inverse=True)
        uniq = uniq[:, None]
    else:
        keys = np.stack(counts, axis=1)
        uniq, g = np.unique(keys, axis=0, return_inverse=True)
    g = g.reshape(-1)
    out = np.zeros(n, dtype=bool)
    step = max(1, 2_000_000 // n)
    for lo in range(0, len(uniq), step):
        block = uniq[lo:lo + step]
        rows = np.flatnonzero((g >= lo) & (g < lo + len(block)))
        # le[a, r]: row r's count vector <= group (lo + a)'s
        le = np.all(keys[None, :, :] <= block[:, None, :], axis=2)
        run = np.minimum.accumulate(np.where(le, delay[None, :], np.inf), axis=1)
        prev = np.concatenate((np.full((len(block), 1), np.inf), run[:, :-1]), axis=1)
        out[rows] = prev[g[rows] - lo, rows] <= delay[rows]
    return out


def pareto_indices(cap, delay, counts: Sequence[np.ndarray] = ()) -> np.ndarray:
    """Indices of rows nondominated under (cap, delay, *counts), all minimized.

    Exact duplicates keep only their first occurrence.
    """
    n = len(cap)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    order = np.lexsort((np.arange(n),) + tuple(c for c in reversed(counts)) + (delay, cap))
    dom = _dominated_sorted(delay[order], [c[order] for c in counts])
    return np.sort(order[~dom])


# (delay weight, cap weight) pairs used to pick diverse members when thinning;
# cap weights span the range of upstream resistances a load can see (kOhm)
_THIN_GRID = [(wd, wc) for wd in (0.0, 0.25, 1.0, 4.0) for wc in (0.0, 0.03, 0.3, 3.0)]
_GRID_D = np.array([wd for wd, _ in _THIN_GRID])
_GRID_C = np.array([wc for _, wc in _THIN_GRID])


def _thin(cs: CandSet, limit: int, weights: tuple[float, float, float]) -> CandSet:
    """Keep the exact (cap, delay) front plus up to ``limit`` other members.

    The (cap, delay) front alone preserves the minimum achievable latency.
    The extra members are the minimizers of a small grid of linear scores
    alpha*(wd*delay + wc*cap) + beta*buffers + gamma*nTSVs, which stand in
    for the unknown upstream resistance and sibling delays; leftover slots
    go to the cheapest member of equal-size cap bands.
    """
    a, b, g = weights
    n = len(cs)
    keep = np.zeros(n, dtype=bool)
    keep[pareto_indices(cs.cap, cs.delay)] = True
    if n - keep.sum() <= limit:
        return cs
    w = b * cs.nb + g * cs.nn
    scores = a * (_GRID_D[:, None] * cs.delay[None, :] + _GRID_C[:, None] * cs.cap[None, :]) + w
    scores[:, keep] = np.inf
    picks = scores.argmin(axis=1)          # ties go to the lowest index
    extra: list[int] = []
    for i in picks.tolist():
        if i not in extra:
            extra.append(i)
        if len(extra) == limit:
            break
    if len(extra) < limit:
        free = ~keep
        free[extra] = False
        rest = np.flatnonzero(free)
        rest = rest[np.lexsort((rest, cs.delay[rest], cs.cap[rest]))]
        for chunk in np.array_split(rest, limit - len(extra)):
            if len(chunk):
                extra.append(int(chunk[np.argmin(w[chunk])]))
    keep[extra[:limit]] = True
    return cs.take(np.flatnonzero(keep))


DOMINANCE = ("4d", "3d", "2d")


def dominance_counts(dominance: str, weights: tuple[float, float, float] = (1.0, 10.0, 1.0)):
    """Count columns compared (besides cap and delay) under a dominance rule."""
    _, b, g = weights
    if dominance == "4d":
        return lambda cs: (cs.nb, cs.nn)
    if dominance == "3d":
        return lambda cs: (b * cs.nb + g * cs.nn,)
    if dominance == "2d":
        return lambda cs: ()
    raise ValueError(f"unknown dominance {dominance!r}")


def prune(cands: Mapping[Side, CandSet], c_max: float, limit: Optional[int] = None,
          weights: tuple[float, float, float] = (1.0, 10.0, 1.0),
          dominance: str = "4d") -> dict[Side, CandSet]:
    """Capacitance filter, then per-side dominance pruning.

    ``dominance`` picks the tuple compared: "4d" is (cap, delay, buffers,
    nTSVs); "3d" folds the counts into the score's resource term
    beta*buffers + gamma*nTSVs, which keeps every candidate that can still
    win the score or the latency; "2d" is (cap, delay) only.  ``limit``
    (None = exact) caps how many members beyond the (cap, delay) front
    each side keeps.
    """
    counts_of = dominance_counts(dominance, weights)
    out = {}
    for s in SIDES:
        cs = cands.get(s)
        if cs is None or not len(cs):
            out[s] = CandSet.empty()
            continue
        ok = cs.cap <= c_max
        if not ok.all():
            cs = cs.take(np.flatnonzero(ok))
        if len(cs) > 1:
            cs = cs.take(pareto_indices(cs.cap, cs.delay, counts_of(cs)))
        if limit is not None:
            cs = _thin(cs, limit, weights)
        out[s] = cs
    return out


# ---------------------------------------------------------------------------
# full DP


@dataclass
class DPResult:
    tree: ClockTree
    root_edge: int
    sets: list[dict[Side, CandSet]]   # per edge id
    modes: tuple = ()
    settings: tuple = ()              # everything else the sets depend on
    raw: Optional[tuple] = None       # compiled-engine buffers, for warm starts

    @property
    def root_set(self) -> CandSet:
        return self.sets[self.root_edge][Side.FRONT]

    def candidate(self, eid: int, side: Side, idx: int) -> Candidate:
        cs = self.sets[eid][side]
        return Candidate(side, float(cs.cap[idx]), float(cs.delay[idx]), int(cs.nb[idx]),
                         int(cs.nn[idx]), Pattern(int(cs.pat[idx])), eid, idx)

    def root_candidates(self) -> list[Candidate]:
        return [self.candidate(self.root_edge, Side.FRONT, i) for i in range(len(self.root_set))]


ENGINES = ("compiled", "numpy")


def _reuse_mask(tree: ClockTree, modes: ModeConfig, warm: Optional["DPResult"],
                settings: tuple) -> np.ndarray:
    """Edges whose whole subtree has the same modes as in ``warm``."""
    E = len(tree.edges)
    reuse = np.zeros(E, dtype=bool)
    if warm is None or warm.raw is None or warm.tree is not tree or warm.settings != settings:
        return reuse
    for eid in tree.postorder:
        reuse[eid] = warm.modes[eid] == modes[eid] and all(
            reuse[c] for c in tree.children[tree.edges[eid].child])
    return reuse


def _empty_raw(E: int) -> tuple:
    f = np.empty(0)
    i = np.empty(0, dtype=np.int64)
    z = np.zeros((E, 2), dtype=np.int64)
    return (f, f, i, i, np.empty(0, dtype=np.int8), i, i, z, z)


def _bottom_up_compiled(tree: ClockTree, modes: ModeConfig, tech: Technology,
                        prune_enabled: bool, limit: Optional[int],
                        weights: tuple[float, float, float], dominance: str,
                        reuse: np.ndarray, prev: Optional[tuple]) -> tuple[list, tuple]:
    from . import _kernel

    E = len(tree.edges)
    kid0 = np.full(E, -1, dtype=np.int64)
    kid1 = np.full(E, -1, dtype=np.int64)
    is_leaf = np.zeros(E, dtype=bool)
    allowed = np.zeros((E, 6), dtype=bool)
    for e in tree.edges:
        kids = tree.children[e.child]
        if kids:
            kid0[e.id] = kids[0]
        if len(kids) > 1:
            kid1[e.id] = kids[1]
        is_leaf[e.id] = tree.nodes[e.child].kind is NodeKind.SINK
        pats = modes[e.id].patterns & LEAF_PATTERNS if is_leaf[e.id] else modes[e.id].patterns
        for p in pats:
            allowed[e.id, int(p) - 1] = True
    length = np.array([e.length for e in tree.edges], dtype=float)
    ncap = np.array([tree.node_cap[e.child] for e in tree.edges], dtype=float)
    t = tech
    tvec = np.array([t.r_front, t.c_front, t.r_back, t.c_back, t.r_ntsv, t.c_ntsv,
                     t.buf_in_cap, t.buf_delay_const, t.buf_drive_res], dtype=float)
    dom = {"4d": _kernel.DOM_4D, "3d": _kernel.DOM_3D, "2d": _kernel.DOM_2D}[dominance]
    if not prune_enabled:
        dom = _kernel.DOM_NONE
    a, b, g = (float(x) for x in weights)
    raw = _kernel.run_bottom_up(
        np.asarray(tree.postorder, dtype=np.int64), kid0, kid1, length, ncap, is_leaf,
        allowed, tvec, float(t.max_cap), dom, -1 if limit is None else int(limit), a, b, g,
        reuse, prev if prev is not None else _empty_raw(E))
    cap, delay, nb, nn, pat, ia, ib, start, stop = raw
    sets = []
    for eid in range(E):
        per = {}
        for s in SIDES:
            lo, hi = start[eid, int(s)], stop[eid, int(s)]
            per[s] = CandSet(cap[lo:hi], delay[lo:hi], nb[lo:hi], nn[lo:hi], pat[lo:hi],
                             ia[lo:hi], ib[lo:hi])
        sets.append(per)
    return sets, raw


def _bottom_up_numpy(tree: ClockTree, modes: ModeConfig, tech: Technology,
                     prune_enabled: bool, limit: Optional[int],
                     weights: tuple[float, float, float], dominance: str) -> list:
    counts = dominance_counts(dominance, weights) if prune_enabled else None
    sets: list = [None] * len(tree.edges)
    edges, children, node_cap = tree.edges, tree.children, tree.node_cap
    nodes = tree.nodes
    for eid in tree.postorder:
        e = edges[eid]
        kid_ids = children[e.child]
        is_leaf = nodes[e.child].kind is NodeKind.SINK
        dpn = DPNode(eid, modes[eid], e.length, is_leaf)
        merged = merge_children([sets[c] for c in kid_ids], node_cap[e.child], counts)
        if counts is not None and len(kid_ids) == 2:
            merged = {s: _prune_merged(m, counts) for s, m in merged.items()}
        cands = insert_patterns(dpn, merged, tech)
        if prune_enabled:
            cands = prune(cands, tech.max_cap, limit, weights, dominance)
        else:
            cands = {s: cs.take(np.flatnonzero(cs.cap <= tech.max_cap)) for s, cs in cands.items()}
        sets[eid] = cands
    return sets


def bottom_up(tree: ClockTree, modes: ModeConfig, tech: Technology, *,
              prune_enabled: bool = True, limit: Optional[int] = None,
              weights: tuple[float, float, float] = (1.0, 10.0, 1.0),
              dominance: str = "4d", engine: str = "compiled",
              warm: Optional[DPResult] = None) -> DPResult:
    """Generate candidate sets for every node; the root keeps Front only.

    ``engine`` selects the compiled pass or the step-by-step numpy
    reference built from :func:`merge_children`, :func:`insert_patterns`
    and :func:`prune`; both return identical sets.  ``warm`` is an earlier
    compiled result on the same tree and settings: subtrees whose modes are
    unchanged are copied instead of recomputed, with identical output.
    Raises :class:`InfeasibleError` when no root candidate survives.
    """
    if dominance not in DOMINANCE:
        raise ValueError(f"unknown dominance {dominance!r}")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if limit is not None and limit < 0:
        raise ValueError("limit must be >= 0")
    root = build_dp_tree(tree, modes)
    settings = (tech, prune_enabled, limit, tuple(float(w) for w in weights), dominance)
    raw = None
    if engine == "compiled":
        reuse = _reuse_mask(tree, modes, warm, settings)
        sets, raw = _bottom_up_compiled(tree, modes, tech, prune_enabled, limit, weights,
                                        dominance, reuse, warm.raw if reuse.any() else None)
    else:
        sets = _bottom_up_numpy(tree, modes, tech, prune_enabled, limit, weights, dominance)
    sets[root.edge][Side.BACK] = CandSet.empty()
    result = DPResult(tree, root.edge, sets, tuple(modes), settings, raw)
    if not len(result.root_set):
        raise InfeasibleError(
            f"no legal solution: max_cap={tech.max_cap} fF is too tight for this tree")
    return result


def moes_score(c: Candidate, alpha: float, beta: float, gamma: float) -> float:
    return alpha * c.max_delay + beta * c.n_buffers + gamma * c.n_ntsvs


def moes_select(cands: Sequence[Candidate], alpha: float, beta: float,
                gamma: float) -> Candidate:
    """Minimum weighted score; ties by latency, buffers, nTSVs, then order."""
    if not cands:
        raise ValueError("empty candidate set")
    return min(enumerate(cands),
               key=lambda ic: (moes_score(ic[1], alpha, beta, gamma), ic[1].max_delay,
                               ic[1].n_buffers, ic[1].n_ntsvs, ic[0]))[1]


def top_down(result: DPResult, selected: Candidate) -> Assignment:
    """Retrace the recorded links from a root candidate to one pattern per edge."""
    tree = result.tree
    out: list[Optional[Pattern]] = [None] * len(tree.edges)
    stack = [(selected.edge, selected.upstream_side, selected.index)]
    while stack:
        eid, side, idx = stack.pop()
        cs = result.sets[eid][side]
        p = Pattern(int(cs.pat[idx]))
        out[eid] = p
        kids = tree.children[tree.edges[eid].child]
        for c, link in zip(kids, (cs.ia, cs.ib)):
            stack.append((c, p.downstream_side, int(link[idx])))
    if any(p is None for p in out):
        raise RuntimeError("top-down retrace left edges unassigned")
    return tuple(out)  # type: ignore[arg-type]


@dataclass(frozen=True)
class Weights:
    alpha: float = 1.0
    beta: float = 10.0
    gamma: float = 1.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


# members kept beyond the (cap, delay) front per node side in production runs;
# exact 4-tuple fronts grow exponentially with tree size
DEFAULT_LIMIT = 16
# the scalarized (cap, delay, beta*nb + gamma*nn) test matches the MOES
# objective and admits a Fenwick-tree prune in the compiled engine
DEFAULT_DOMINANCE = "3d"


def select_and_retrace(result: DPResult, weights: Weights) -> Assignment:
    best = moes_select(result.root_candidates(), *weights.as_tuple())
    return top_down(result, best)


def concurrent_insert(tree: ClockTree, modes: ModeConfig, weights: Weights,
                      tech: Technology, limit: Optional[int] = DEFAULT_LIMIT,
                      dominance: str = DEFAULT_DOMINANCE,
                      warm: Optional[DPResult] = None) -> tuple[Assignment, TreeMetrics]:
    """bottom_up -> moes_select -> top_down -> evaluate_tree."""
    result = bottom_up(tree, modes, tech, limit=limit, weights=weights.as_tuple(),
                       dominance=dominance, warm=warm)
    assignment = select_and_retrace(result, weights)
    return assignment, evaluate_tree(tree, assignment, tech).metrics
