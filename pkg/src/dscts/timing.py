"""Elmore delay of the six edge patterns and of whole trees.

Every wire or nTSV element contributes R_elem * (own C + everything
downstream of it), with the full wire capacitance lumped at the far end of
the element.  The buffer and the two-nTSV closed forms reduce exactly to the
textbook expansions; the single-nTSV forms follow from the same rule.

The functions below accept floats or numpy arrays for ``L`` and ``C_d``; the
arithmetic is written once so that scalar and vectorized callers get
bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .model import (PATTERNS, ClockTree, EdgeArrays, Pattern, Technology, TreeMetrics,
                    node_sides)


def buffer_delay(load, tech: Technology):
    """Linear buffer model: intrinsic delay plus drive resistance times load."""
    return tech.buf_delay_const + tech.buf_drive_res * load


def pattern_electrical(p: Pattern, L, C_d, tech: Technology):
    """(eff_cap, delay) of an edge of length ``L`` driving ``C_d``.

    ``eff_cap`` is the capacitance seen at the upstream end; ``delay`` runs
    from the upstream end to the downstream end.
    """
    if p is Pattern.P1:
        rf, cf = tech.r_front, tech.c_front
        wire_c = cf * L
        return wire_c + C_d, rf * L * (wire_c + C_d)
    if p is Pattern.P2:
        rf, cf = tech.r_front, tech.c_front
        half_c = cf * L / 2
        delay = (rf * cf / 2) * L * L + (rf * (tech.buf_in_cap + C_d) / 2) * L \
            + buffer_delay(half_c + C_d, tech)
        return half_c + tech.buf_in_cap, delay
    rb, cb = tech.r_back, tech.c_back
    Rv, Cv = tech.r_ntsv, tech.c_ntsv
    wire_c = cb * L
    if p is Pattern.P3:
        return wire_c + C_d, rb * L * (wire_c + C_d)
    if p is Pattern.P4:
        delay = (rb * cb) * L * L + (rb * Cv + rb * C_d + Rv * cb) * L + Rv * (3 * Cv + 2 * C_d)
        return 2 * Cv + wire_c + C_d, delay
    if p is Pattern.P5:
        delay = Rv * (Cv + C_d) + rb * L * (wire_c + Cv + C_d)
        return Cv + wire_c + C_d, delay
    if p is Pattern.P6:
        delay = rb * L * (wire_c + C_d) + Rv * (Cv + wire_c + C_d)
        return Cv + wire_c + C_d, delay
    raise ValueError(f"unknown pattern {p!r}")


def buffer_load(p: Pattern, L, C_d, tech: Technology):
    """Capacitance driven by the pattern's buffer (0 when it has none)."""
    if p is Pattern.P2:
        return tech.c_front * L / 2 + C_d
    return 0.0 * C_d


@dataclass(frozen=True)
class EdgeElectrical:
    eff_cap: float
    delay: float


# per-pattern attribute lookups, indexed by pattern value
_UP = np.array([0] + [int(p.upstream_side) for p in PATTERNS])
_DOWN = np.array([0] + [int(p.downstream_side) for p in PATTERNS])
_WIRE = np.array([0] + [int(p.wire_side) for p in PATTERNS])
_NBUF = np.array([0] + [p.n_buffers for p in PATTERNS])
_NTSV = np.array([0] + [p.n_ntsvs for p in PATTERNS])


@dataclass
class TreeTiming:
    """Everything :func:`evaluate_tree` learns about one assignment.

    Per-edge arrays are indexed by edge id: ``eff_cap`` and ``delay`` of the
    edge itself, ``loads`` (C_d at its downstream end) and ``path_delay``
    (worst sink delay measured from its upstream end).
    """

    metrics: TreeMetrics
    sink_delays: dict[str, float]
    eff_cap: np.ndarray
    delay: np.ndarray
    loads: np.ndarray
    path_delay: np.ndarray
    root_eff_cap: float

    @cached_property
    def edges(self) -> list[EdgeElectrical]:
        return [EdgeElectrical(float(c), float(d)) for c, d in zip(self.eff_cap, self.delay)]

    def cap_violations(self, tree: ClockTree, assignment: Sequence[Pattern],
                       tech: Technology) -> list[str]:
        """Edges whose upstream load or internal buffer load exceeds ``max_cap``."""
        return cap_violations(tree.arrays, np.array([int(p) for p in assignment]), self, tech)


def cap_violations(arr: EdgeArrays, pats: np.ndarray, timing: TreeTiming,
                   tech: Technology) -> list[str]:
    bad = []
    for eid in np.flatnonzero(timing.eff_cap > tech.max_cap):
        bad.append(f"edge {eid}: eff_cap {timing.eff_cap[eid]:.6g} > {tech.max_cap}")
    buf = np.flatnonzero(pats == int(Pattern.P2))
    load = buffer_load(Pattern.P2, arr.length[buf], timing.loads[buf], tech)
    for eid, v in zip(buf[load > tech.max_cap], load[load > tech.max_cap]):
        bad.append(f"edge {eid}: buffer load {v:.6g} > {tech.max_cap}")
    if timing.root_eff_cap > tech.max_cap:
        bad.append(f"root load {timing.root_eff_cap:.6g} > {tech.max_cap}")
    return bad


def connectivity_ok(arr: EdgeArrays, pats: np.ndarray) -> np.ndarray | bool:
    """Vectorized connectivity test (root and sinks Front, shared sides agree).

    ``pats`` may be one assignment (shape ``(E,)``) or a batch ``(K, E)``;
    the result is a bool or a length-K mask accordingly.
    """
    up, down = _UP[pats], _DOWN[pats]
    pe = arr.parent_edge[arr.parent]
    expected = np.where(pe >= 0, down[..., np.maximum(pe, 0)], 0)
    ok = np.all(up == expected, axis=-1) & np.all(down[..., arr.sink_child] == 0, axis=-1)
    return bool(ok) if pats.ndim == 1 else ok


def upward_pass(arr: EdgeArrays, pats: np.ndarray, tech: Technology):
    """Per-edge (eff_cap, delay, load, worst downstream path) arrays.

    Works level by level from the deepest edges; ``pats`` may carry leading
    batch dimensions.  Loads add the children in edge-id order, matching
    a plain recursive walk bit for bit.
    """
    shape = pats.shape
    eff = np.zeros(shape)
    dly = np.zeros(shape)
    loads = np.zeros(shape)
    worst = np.zeros(shape)
    for lev in arr.levels:
        k0, k1 = arr.kid0[lev], arr.kid1[lev]
        h0, h1 = k0 >= 0, k1 >= 0
        load = arr.ncap[lev] + np.where(h0, eff[..., k0], 0.0)
        load = load + np.where(h1, eff[..., k1], 0.0)
        down = np.where(h0, worst[..., k0], 0.0)
        down = np.where(h1, np.maximum(down, worst[..., k1]), down)
        lp = pats[..., lev]
        length = np.broadcast_to(arr.length[lev], lp.shape)
        c = np.empty(lp.shape)
        d = np.empty(lp.shape)
        for p in PATTERNS:
            m = lp == int(p)
            if m.any():
                c[m], d[m] = pattern_electrical(p, length[m], load[m], tech)
        eff[..., lev], dly[..., lev], loads[..., lev] = c, d, load
        worst[..., lev] = d + down
    return eff, dly, loads, worst


def evaluate_arrays(arr: EdgeArrays, pats: np.ndarray, tech: Technology) -> TreeTiming:
    """Evaluate an assignment given as pattern values over a flat tree view.

    Latency is the worst root-to-sink delay, accumulated bottom-up as
    ``delay(edge) + max(children)``; per-sink delays are accumulated
    top-down and give the skew.
    """
    eff, dly, loads, worst = upward_pass(arr, pats, tech)
    arrival = np.zeros(arr.n_nodes)
    for lev in reversed(arr.levels):
        arrival[arr.child[lev]] = arrival[arr.parent[lev]] + dly[lev]
    sink_nodes = list(arr.sink_of_node)
    sink_delays = dict(zip(arr.sink_of_node.values(), arrival[sink_nodes].tolist()))
    latency = float(worst[arr.root_kids].max()) if len(arr.root_kids) else 0.0
    skew = float(arrival[sink_nodes].max() - arrival[sink_nodes].min()) if sink_nodes else 0.0
    wire = _WIRE[pats]
    root_cap = 0.0
    for c in arr.root_kids:
        root_cap = root_cap + eff[c]
    metrics = TreeMetrics(latency=latency, skew=skew,
                          wl_front=float(arr.length[wire == 0].sum()),
                          wl_back=float(arr.length[wire == 1].sum()),
                          n_buffers=int(_NBUF[pats].sum()), n_ntsvs=int(_NTSV[pats].sum()))
    return TreeTiming(metrics, sink_delays, eff, dly, loads, worst, float(root_cap))


def evaluate_tree(tree: ClockTree, assignment: Sequence[Pattern], tech: Technology,
                  check: bool = True) -> TreeTiming:
    """Elmore-evaluate a tree under a pattern assignment.

    With ``check`` an assignment that breaks the connectivity constraint
    raises :class:`ConnectivityError` naming the offending node.
    """
    if len(assignment) != len(tree.edges):
        node_sides(tree, assignment)  # raises the length error
    pats = np.array([int(p) for p in assignment], dtype=np.int64)
    arr = tree.arrays
    if check and not connectivity_ok(arr, pats):
        node_sides(tree, assignment)  # raises with the node named
    return evaluate_arrays(arr, pats, tech)


def all_p1(tree: ClockTree) -> tuple[Pattern, ...]:
    return (Pattern.P1,) * len(tree.edges)
