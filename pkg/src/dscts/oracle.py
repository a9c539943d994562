"""Exhaustive ground truth for small trees.

Every pattern assignment is generated in lexicographic order (edge ids,
pattern index), filtered for connectivity, allowed patterns and the
capacitance limit, and evaluated with the tree evaluator.  Nothing here
shares candidate arithmetic with the DP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import (LEAF_PATTERNS, PATTERNS, Assignment, ClockTree, InsertMode, Pattern, Side,
                    Technology)
from .timing import _DOWN, _NBUF, _NTSV, _UP, buffer_load, upward_pass

MAX_EDGES = 14
_CHUNK = 50_000


class OracleRefusal(ValueError):
    """The tree is too large to enumerate."""


@dataclass
class OracleResult:
    # upstream side at the root -> set of (eff_cap, max_delay, buffers, ntsvs)
    pareto: dict[Side, set[tuple[float, float, int, int]]]
    min_latency: float
    best: Optional[Assignment]      # first assignment in enumeration order reaching min_latency
    n_checked: int                  # connectivity-valid assignments over allowed patterns
    n_feasible: int                 # of those, the ones meeting the capacitance limit


def edge_patterns(tree: ClockTree, modes: Sequence[InsertMode]) -> list[list[Pattern]]:
    out = []
    for eid in range(len(tree.edges)):
        allowed = modes[eid].patterns
        if tree.is_leaf_edge(eid):
            allowed = allowed & LEAF_PATTERNS
        out.append([p for p in PATTERNS if p in allowed])
    return out


def valid_assignments(tree: ClockTree, modes: Sequence[InsertMode]) -> np.ndarray:
    """All connectivity-valid assignments as a (K, E) array, rows in lexicographic order."""
    E = len(tree.edges)
    if E > MAX_EDGES:
        raise OracleRefusal(f"{E} edges exceeds the oracle limit of {MAX_EDGES}")
    choices = edge_patterns(tree, modes)
    rows = np.zeros((1, 0), dtype=np.int64)
    for j in range(E):
        opts = np.array([int(p) for p in choices[j]], dtype=np.int64)
        k = len(rows)
        rows = np.column_stack([np.repeat(rows, len(opts), axis=0), np.tile(opts, k)])
        e = tree.edges[j]
        keep = np.ones(len(rows), dtype=bool)
        up, down = _UP[rows[:, j]], _DOWN[rows[:, j]]
        pe = tree.parent_edge[e.parent]
        if pe == -1:
            keep &= up == int(Side.FRONT)
        elif pe < j:
            keep &= up == _DOWN[rows[:, pe]]
        for c in tree.children[e.child]:
            if c < j:
                keep &= _UP[rows[:, c]] == down
        if tree.is_leaf_edge(j):
            keep &= down == int(Side.FRONT)
        rows = rows[keep]
    return rows


def _pareto4(points: np.ndarray) -> np.ndarray:
    """Rows of ``points`` (cap, delay, nb, nn) not weakly dominated by a different row."""
    if len(points) == 0:
        return points
    pts = np.unique(points, axis=0)
    # exact front within each (nb, nn) group first, then across groups
    survivors = []
    for key in np.unique(pts[:, 2:], axis=0):
        grp = pts[np.all(pts[:, 2:] == key, axis=1)]
        grp = grp[np.lexsort((grp[:, 1], grp[:, 0]))]
        before = np.minimum.accumulate(np.concatenate(([np.inf], grp[:-1, 1])))
        survivors.append(grp[grp[:, 1] < before])
    cand = np.vstack(survivors)
    keep = []
    for i, row in enumerate(cand):
        le = np.all(cand <= row, axis=1)
        le[i] = False
        if not le.any():
            keep.append(i)
    return cand[keep]


def enumerate_assignments(tree: ClockTree, modes: Sequence[InsertMode], tech: Technology,
                          c_max: Optional[float] = None) -> OracleResult:
    """Complete enumeration; ``c_max`` defaults to ``tech.max_cap``."""
    c_max = tech.max_cap if c_max is None else c_max
    rows = valid_assignments(tree, modes)
    arr = tree.arrays
    p2 = int(Pattern.P2)
    fronts = []
    best_lat, best_row = np.inf, None
    feasible = 0
    for lo in range(0, len(rows), _CHUNK):
        pats = rows[lo:lo + _CHUNK]
        eff, _, loads, worst = upward_pass(arr, pats, tech)
        ok = np.all(eff <= c_max, axis=1)
        bl = buffer_load(Pattern.P2, arr.length, loads, tech)
        ok &= np.all((pats != p2) | (bl <= c_max), axis=1)
        root_cap = np.zeros(len(pats))
        for c in arr.root_kids:
            root_cap = root_cap + eff[:, c]
        ok &= root_cap <= c_max
        lat = worst[:, arr.root_kids].max(axis=1)
        nb = _NBUF[pats].sum(axis=1)
        nn = _NTSV[pats].sum(axis=1)
        feasible += int(ok.sum())
        if ok.any():
            idx = np.flatnonzero(ok)
            i = idx[np.argmin(lat[idx])]
            if lat[i] < best_lat:
                best_lat, best_row = float(lat[i]), pats[i]
            fronts.append(_pareto4(np.column_stack([root_cap[idx], lat[idx], nb[idx], nn[idx]])))
    front = _pareto4(np.vstack(fronts)) if fronts else np.zeros((0, 4))
    pareto = {Side.FRONT: {(float(c), float(d), int(b), int(n)) for c, d, b, n in front},
              Side.BACK: set()}
    best = tuple(Pattern(int(p)) for p in best_row) if best_row is not None else None
    return OracleResult(pareto, best_lat, best, len(rows), feasible)
