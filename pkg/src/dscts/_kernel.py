"""Compiled bottom-up pass of the insertion DP.

Mirrors ``dp.merge_children`` -> ``dp.insert_patterns`` -> ``dp.prune`` row
for row (same arithmetic order, same candidate order), so it produces the
same candidate sets as the numpy reference, only without per-node
interpreter overhead.  All candidates live in shared growable buffers;
``start``/``stop`` give each (edge, upstream side) its slice.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# dominance codes
DOM_4D, DOM_3D, DOM_2D, DOM_NONE = 0, 1, 2, 3

# pattern attributes, index = pattern - 1
_UP = np.array([0, 0, 1, 0, 1, 0], dtype=np.int64)     # upstream side
_DOWN = np.array([0, 0, 1, 0, 0, 1], dtype=np.int64)   # downstream side
_NB = np.array([0, 1, 0, 0, 0, 0], dtype=np.int64)
_NN = np.array([0, 0, 0, 2, 1, 1], dtype=np.int64)

_GRID_D = np.array([wd for wd in (0.0, 0.25, 1.0, 4.0) for _ in range(4)])
_GRID_C = np.array([wc for _ in range(4) for wc in (0.0, 0.03, 0.3, 3.0)])


@njit(cache=True)
def _electrical(p, L, C_d, tech):
    """Scalar twin of ``timing.pattern_electrical`` (identical op order)."""
    rf, cf, rb, cb, Rv, Cv, cin, bd, br = (tech[0], tech[1], tech[2], tech[3], tech[4],
                                           tech[5], tech[6], tech[7], tech[8])
    if p == 1:
        wire_c = cf * L
        return wire_c + C_d, rf * L * (wire_c + C_d)
    if p == 2:
        half_c = cf * L / 2
        delay = (rf * cf / 2) * L * L + (rf * (cin + C_d) / 2) * L + (bd + br * (half_c + C_d))
        return half_c + cin, delay
    wire_c = cb * L
    if p == 3:
        return wire_c + C_d, rb * L * (wire_c + C_d)
    if p == 4:
        delay = (rb * cb) * L * L + (rb * Cv + rb * C_d + Rv * cb) * L + Rv * (3 * Cv + 2 * C_d)
        return 2 * Cv + wire_c + C_d, delay
    if p == 5:
        delay = Rv * (Cv + C_d) + rb * L * (wire_c + Cv + C_d)
        return Cv + wire_c + C_d, delay
    delay = rb * L * (wire_c + C_d) + Rv * (Cv + wire_c + C_d)
    return Cv + wire_c + C_d, delay


@njit(cache=True)
def _before(i, j, cap, delay, c1, c2):
    if cap[i] != cap[j]:
        return cap[i] < cap[j]
    if delay[i] != delay[j]:
        return delay[i] < delay[j]
    if c1[i] != c1[j]:
        return c1[i] < c1[j]
    if c2[i] != c2[j]:
        return c2[i] < c2[j]
    return i < j


@njit(cache=True)
def _lex_order(cap, delay, c1, c2):
    """Lexicographic order by (cap, delay, c1, c2, index): bottom-up merge
    sort over the index array."""
    n = len(cap)
    src = np.arange(n)
    dst = np.empty(n, dtype=np.int64)
    # insertion-sort short runs first
    run = 16
    for lo in range(0, n, run):
        hi = min(lo + run, n)
        for k in range(lo + 1, hi):
            x = src[k]
            q = k - 1
            while q >= lo and _before(x, src[q], cap, delay, c1, c2):
                src[q + 1] = src[q]
                q -= 1
            src[q + 1] = x
    width = run
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            a, b, k = lo, mid, lo
            while a < mid and b < hi:
                if _before(src[b], src[a], cap, delay, c1, c2):
                    dst[k] = src[b]
                    b += 1
                else:
                    dst[k] = src[a]
                    a += 1
                k += 1
            while a < mid:
                dst[k] = src[a]
                a += 1
                k += 1
            while b < hi:
                dst[k] = src[b]
                b += 1
                k += 1
        src, dst = dst, src
        width *= 2
    return src


@njit(cache=True)
def _counts(nb, nn, dom, beta, gamma):
    n = len(nb)
    c1 = np.zeros(n)
    c2 = np.zeros(n)
    if dom == DOM_4D:
        for i in range(n):
            c1[i] = nb[i]
            c2[i] = nn[i]
    elif dom == DOM_3D:
        for i in range(n):
            c1[i] = beta * nb[i] + gamma * nn[i]
    return c1, c2


@njit(cache=True)
def _pareto_mask(cap, delay, c1, c2, use_counts):
    """Nondominated rows (duplicates keep the first).  Sweep in lex order;
    a row is dominated iff some already-kept row is <= in delay and counts."""
    n = len(cap)
    keep = np.zeros(n, dtype=np.bool_)
    if n == 0:
        return keep
    order = _lex_order(cap, delay, c1, c2)
    if not use_counts:
        best = np.inf
        for k in range(n):
            i = order[k]
            if delay[i] < best:
                keep[i] = True
                best = delay[i]
        return keep
    if c2_is_zero(c2):
        # one count column: Fenwick prefix-min of delay over count ranks
        rank = np.empty(n, dtype=np.int64)
        vals = np.sort(c1)
        for i in range(n):
            rank[i] = np.searchsorted(vals, c1[i], side="left") + 1
        tree = np.full(n + 1, np.inf)
        for k in range(n):
            i = order[k]
            best = np.inf
            r = rank[i]
            while r > 0:
                if tree[r] < best:
                    best = tree[r]
                r -= r & -r
            if best <= delay[i]:
                continue
            keep[i] = True
            r = rank[i]
            while r <= n:
                if delay[i] < tree[r]:
                    tree[r] = delay[i]
                r += r & -r
        return keep
    kept = np.empty(n, dtype=np.int64)
    nk = 0
    for k in range(n):
        i = order[k]
        dominated = False
        for q in range(nk):
            j = kept[q]
            if delay[j] <= delay[i] and c1[j] <= c1[i] and c2[j] <= c2[i]:
                dominated = True
                break
        if not dominated:
            keep[i] = True
            kept[nk] = i
            nk += 1
    return keep


@njit(cache=True)
def c2_is_zero(c2):
    for v in c2:
        if v != 0.0:
            return False
    return True


@njit(cache=True)
def _thin_mask(cap, delay, nb, nn, limit, alpha, beta, gamma):
    """Twin of ``dp._thin``: the (cap, delay) front plus <= ``limit`` extras."""
    n = len(cap)
    z = np.zeros(n)
    keep = _pareto_mask(cap, delay, z, z, False)
    nfront = keep.sum()
    if n - nfront <= limit:
        return np.ones(n, dtype=np.bool_)
    if limit == 0:
        return keep
    w = np.empty(n)
    for i in range(n):
        w[i] = beta * nb[i] + gamma * nn[i]
    extra = np.empty(limit, dtype=np.int64)
    ne = 0
    for g in range(len(_GRID_D)):
        wd, wc = _GRID_D[g], _GRID_C[g]
        best, arg = np.inf, -1
        for i in range(n):
            if keep[i]:
                continue
            s = alpha * (wd * delay[i] + wc * cap[i]) + w[i]
            if s < best:
                best, arg = s, i
        dup = False
        for q in range(ne):
            if extra[q] == arg:
                dup = True
        if not dup:
            extra[ne] = arg
            ne += 1
        if ne == limit:
            break
    if ne < limit:
        free = ~keep
        for q in range(ne):
            free[extra[q]] = False
        rest = np.flatnonzero(free)
        o = _lex_order(cap[rest], delay[rest], z[rest], z[rest])
        rest = rest[o]
        parts = limit - ne
        m = len(rest)
        base, rem = m // parts, m % parts
        pos = 0
        for k in range(parts):
            size = base + 1 if k < rem else base
            if size == 0:
                continue
            arg = rest[pos]
            for t in range(pos + 1, pos + size):
                if w[rest[t]] < w[arg]:
                    arg = rest[t]
            extra[ne] = arg
            ne += 1
            pos += size
    for q in range(ne):
        keep[extra[q]] = True
    return keep


@njit(cache=True)
def _front_pairs(slow_delay, f_cap, f_delay, f_c1, f_c2, strict):
    """Twin of ``dp._front_pairs`` (row-major output order)."""
    m = len(f_cap)
    order = np.argsort(f_delay, kind="mergesort")
    death = np.full(m, m, dtype=np.int64)
    for t in range(m):
        it = order[t]
        for u in range(m):
            if u == t:
                continue
            iu = order[u]
            le = f_cap[iu] <= f_cap[it] and f_c1[iu] <= f_c1[it] and f_c2[iu] <= f_c2[it]
            if not le:
                continue
            eq = f_cap[iu] == f_cap[it] and f_c1[iu] == f_c1[it] and f_c2[iu] == f_c2[it]
            if (not eq) or u < t:
                death[t] = u
                break
    d = f_delay[order]
    n = len(slow_delay)
    cnt = 0
    prefix = np.empty(n, dtype=np.int64)
    for i in range(n):
        if strict:
            prefix[i] = np.searchsorted(d, slow_delay[i], side="left")
        else:
            prefix[i] = np.searchsorted(d, slow_delay[i], side="right")
        for t in range(min(prefix[i], m)):
            if prefix[i] <= death[t]:
                cnt += 1
    oi = np.empty(cnt, dtype=np.int64)
    oj = np.empty(cnt, dtype=np.int64)
    k = 0
    for i in range(n):
        for t in range(min(prefix[i], m)):
            if prefix[i] <= death[t]:
                oi[k] = i
                oj[k] = order[t]
                k += 1
    return oi, oj


@njit(cache=True)
def _grow(buf, need):
    if need <= len(buf):
        return buf
    out = np.empty(max(need, 2 * len(buf)), dtype=buf.dtype)
    out[:len(buf)] = buf
    return out


@njit(cache=True)
def run_bottom_up(post, kid0, kid1, length, ncap, is_leaf, allowed, tech, cmax,
                  dom, limit, alpha, beta, gamma, reuse, prev):
    """Candidate sets for every edge.  Returns the shared buffers and the
    per-(edge, side) ``start``/``stop`` offsets.

    Edges flagged in ``reuse`` copy their sets from ``prev`` (the buffers and
    offsets of an earlier run whose subtree inputs were identical).
    """
    p_cap, p_delay, p_nb, p_nn, p_pat, p_ia, p_ib, p_start, p_stop = prev
    E = len(post)
    start = np.zeros((E, 2), dtype=np.int64)
    stop = np.zeros((E, 2), dtype=np.int64)
    size = 1024
    g_cap = np.empty(size)
    g_delay = np.empty(size)
    g_nb = np.empty(size, dtype=np.int64)
    g_nn = np.empty(size, dtype=np.int64)
    g_pat = np.empty(size, dtype=np.int8)
    g_ia = np.empty(size, dtype=np.int64)
    g_ib = np.empty(size, dtype=np.int64)
    used = 0
    prune_on = dom != DOM_NONE
    for k in range(E):
        e = post[k]
        if reuse[e]:
            for u in range(2):
                lo, hi = p_start[e, u], p_stop[e, u]
                need = used + hi - lo
                g_cap = _grow(g_cap, need)
                g_delay = _grow(g_delay, need)
                g_nb = _grow(g_nb, need)
                g_nn = _grow(g_nn, need)
                g_pat = _grow(g_pat, need)
                g_ia = _grow(g_ia, need)
                g_ib = _grow(g_ib, need)
                g_cap[used:need] = p_cap[lo:hi]
                g_delay[used:need] = p_delay[lo:hi]
                g_nb[used:need] = p_nb[lo:hi]
                g_nn[used:need] = p_nn[lo:hi]
                g_pat[used:need] = p_pat[lo:hi]
                g_ia[used:need] = p_ia[lo:hi]
                g_ib[used:need] = p_ib[lo:hi]
                start[e, u], stop[e, u] = used, need
                used = need
            continue
        a_e, b_e = kid0[e], kid1[e]
        base = ncap[e]
        # per shared side: merged rows
        m_cap = [np.empty(0), np.empty(0)]
        m_delay = [np.empty(0), np.empty(0)]
        m_nb = [np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)]
        m_nn = [np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)]
        m_ia = [np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)]
        m_ib = [np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)]
        for s in range(2):
            if a_e < 0:
                if s == 0:
                    m_cap[0] = np.full(1, base)
                    m_delay[0] = np.zeros(1)
                    m_nb[0] = np.zeros(1, dtype=np.int64)
                    m_nn[0] = np.zeros(1, dtype=np.int64)
                    m_ia[0] = np.full(1, -1, dtype=np.int64)
                    m_ib[0] = np.full(1, -1, dtype=np.int64)
                continue
            a0, a1 = start[a_e, s], stop[a_e, s]
            if a1 == a0:
                continue
            if b_e < 0:
                na = a1 - a0
                m_cap[s] = base + g_cap[a0:a1]
                m_delay[s] = g_delay[a0:a1].copy()
                m_nb[s] = g_nb[a0:a1].copy()
                m_nn[s] = g_nn[a0:a1].copy()
                m_ia[s] = np.arange(na)
                m_ib[s] = np.full(na, -1, dtype=np.int64)
                continue
            b0, b1 = start[b_e, s], stop[b_e, s]
            if b1 == b0:
                continue
            na, nbb = a1 - a0, b1 - b0
            if not prune_on:
                ia = np.empty(na * nbb, dtype=np.int64)
                ib = np.empty(na * nbb, dtype=np.int64)
                for i in range(na):
                    for j in range(nbb):
                        ia[i * nbb + j] = i
                        ib[i * nbb + j] = j
            else:
                ac1, ac2 = _counts(g_nb[a0:a1], g_nn[a0:a1], dom, beta, gamma)
                bc1, bc2 = _counts(g_nb[b0:b1], g_nn[b0:b1], dom, beta, gamma)
                i1, j1 = _front_pairs(g_delay[a0:a1], g_cap[b0:b1], g_delay[b0:b1], bc1, bc2, False)
                j2, i2 = _front_pairs(g_delay[b0:b1], g_cap[a0:a1], g_delay[a0:a1], ac1, ac2, True)
                ia = np.concatenate((i1, i2))
                ib = np.concatenate((j1, j2))
            n = len(ia)
            cap = np.empty(n)
            delay = np.empty(n)
            nb = np.empty(n, dtype=np.int64)
            nn = np.empty(n, dtype=np.int64)
            for r in range(n):
                x, y = a0 + ia[r], b0 + ib[r]
                cap[r] = base + g_cap[x] + g_cap[y]
                delay[r] = max(g_delay[x], g_delay[y])
                nb[r] = g_nb[x] + g_nb[y]
                nn[r] = g_nn[x] + g_nn[y]
            if prune_on and n > 1:
                c1, c2 = _counts(nb, nn, dom, beta, gamma)
                keep = np.flatnonzero(_pareto_mask(cap, delay, c1, c2, dom != DOM_2D))
                cap, delay, nb, nn, ia, ib = cap[keep], delay[keep], nb[keep], nn[keep], ia[keep], ib[keep]
            m_cap[s], m_delay[s], m_nb[s], m_nn[s], m_ia[s], m_ib[s] = cap, delay, nb, nn, ia, ib
        # patterns, collected per upstream side in pattern order
        for u in range(2):
            tot = 0
            for p in range(1, 7):
                if allowed[e, p - 1] and _UP[p - 1] == u:
                    tot += len(m_cap[_DOWN[p - 1]])
            c_cap = np.empty(tot)
            c_delay = np.empty(tot)
            c_nb = np.empty(tot, dtype=np.int64)
            c_nn = np.empty(tot, dtype=np.int64)
            c_pat = np.empty(tot, dtype=np.int8)
            c_ia = np.empty(tot, dtype=np.int64)
            c_ib = np.empty(tot, dtype=np.int64)
            n = 0
            L = length[e]
            for p in range(1, 7):
                if not (allowed[e, p - 1] and _UP[p - 1] == u):
                    continue
                s = _DOWN[p - 1]
                for r in range(len(m_cap[s])):
                    Cd = m_cap[s][r]
                    if p == 2 and tech[1] * L / 2 + Cd > cmax:
                        continue
                    ec, d = _electrical(p, L, Cd, tech)
                    if ec > cmax:
                        continue
                    c_cap[n] = ec
                    c_delay[n] = d + m_delay[s][r]
                    c_nb[n] = m_nb[s][r] + _NB[p - 1]
                    c_nn[n] = m_nn[s][r] + _NN[p - 1]
                    c_pat[n] = p
                    c_ia[n] = m_ia[s][r]
                    c_ib[n] = m_ib[s][r]
                    n += 1
            c_cap, c_delay, c_nb, c_nn = c_cap[:n], c_delay[:n], c_nb[:n], c_nn[:n]
            c_pat, c_ia, c_ib = c_pat[:n], c_ia[:n], c_ib[:n]
            if prune_on and n > 1:
                c1, c2 = _counts(c_nb, c_nn, dom, beta, gamma)
                keep = np.flatnonzero(_pareto_mask(c_cap, c_delay, c1, c2, dom != DOM_2D))
                c_cap, c_delay, c_nb, c_nn = c_cap[keep], c_delay[keep], c_nb[keep], c_nn[keep]
                c_pat, c_ia, c_ib = c_pat[keep], c_ia[keep], c_ib[keep]
            if prune_on and limit >= 0 and len(c_cap) > 0:
                keep = np.flatnonzero(_thin_mask(c_cap, c_delay, c_nb, c_nn, limit, alpha, beta, gamma))
                c_cap, c_delay, c_nb, c_nn = c_cap[keep], c_delay[keep], c_nb[keep], c_nn[keep]
                c_pat, c_ia, c_ib = c_pat[keep], c_ia[keep], c_ib[keep]
            n = len(c_cap)
            need = used + n
            g_cap = _grow(g_cap, need)
            g_delay = _grow(g_delay, need)
            g_nb = _grow(g_nb, need)
            g_nn = _grow(g_nn, need)
            g_pat = _grow(g_pat, need)
            g_ia = _grow(g_ia, need)
            g_ib = _grow(g_ib, need)
            g_cap[used:need] = c_cap
            g_delay[used:need] = c_delay
            g_nb[used:need] = c_nb
            g_nn[used:need] = c_nn
            g_pat[used:need] = c_pat
            g_ia[used:need] = c_ia
            g_ib[used:need] = c_ib
            start[e, u], stop[e, u] = used, need
            used = need
    return (g_cap[:used], g_delay[:used], g_nb[:used], g_nn[:used], g_pat[:used],
            g_ia[:used], g_ib[:used], start, stop)
