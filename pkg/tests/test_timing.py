import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dscts.dp import bottom_up, moes_select, top_down, uniform_modes
from dscts.model import (PATTERNS, ConnectivityError, InsertMode, Pattern, Point, Technology,
                         TreeMetrics)
from dscts.timing import all_p1, buffer_delay, buffer_load, evaluate_tree, pattern_electrical
from elmore_oracle import chain, sink_delays
from treegen import random_binary_tree

T = Technology()
lengths = st.floats(0, 500, allow_nan=False)
loads = st.floats(0, 50, allow_nan=False)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_buffer_delay_examples():
    assert buffer_delay(0, Technology(buf_delay_const=10, buf_drive_res=0)) == 10
    assert buffer_delay(20, Technology(buf_delay_const=10, buf_drive_res=0.5)) == 20


@pytest.mark.parametrize("p,delay,cap", [
    (Pattern.P1, 55.512, 22.918),
    (Pattern.P3, 0.830454, 21.6264),
    (Pattern.P4, 1.463376, 21.6344),
])
def test_table_spot_values(p, delay, cap):
    c, d = pattern_electrical(p, 100.0, 10.0, T)
    assert d == pytest.approx(delay, rel=1e-5)
    assert c == pytest.approx(cap, rel=1e-12)


def test_p1_zero_length():
    assert pattern_electrical(Pattern.P1, 0.0, 7.0, T) == (7.0, 0.0)


@given(lengths, loads)
def test_buffered_wire_three_term_identity(L, C_d):
    rf, cf = T.r_front, T.c_front
    terms = rf * (L / 2) * (cf * L / 2 + T.buf_in_cap) + buffer_delay(cf * L / 2 + C_d, T) \
        + rf * (L / 2) * (cf * L / 2 + C_d)
    assert rel(pattern_electrical(Pattern.P2, L, C_d, T)[1], terms) <= 1e-12


@given(lengths, loads)
def test_ntsv_pair_three_term_identity(L, C_d):
    rb, cb, Rv, Cv = T.r_back, T.c_back, T.r_ntsv, T.c_ntsv
    terms = Rv * (Cv + cb * L + Cv + C_d) + rb * L * (cb * L + Cv + C_d) + Rv * (Cv + C_d)
    assert rel(pattern_electrical(Pattern.P4, L, C_d, T)[1], terms) <= 1e-12


@given(st.sampled_from(PATTERNS), lengths, loads)
def test_patterns_match_element_chain(p, L, C_d):
    c, d = pattern_electrical(p, L, C_d, T)
    c2, d2 = chain(p, L, C_d, T)
    assert c == pytest.approx(c2, rel=1e-12, abs=1e-12)
    assert d == pytest.approx(d2, rel=1e-12, abs=1e-12)


@given(st.sampled_from(PATTERNS), lengths, lengths, loads, loads)
def test_delay_monotone(p, L1, L2, C1, C2):
    lo_L, hi_L = sorted((L1, L2))
    lo_C, hi_C = sorted((C1, C2))
    assert pattern_electrical(p, lo_L, lo_C, T)[1] <= pattern_electrical(p, hi_L, lo_C, T)[1]
    assert pattern_electrical(p, lo_L, lo_C, T)[1] <= pattern_electrical(p, lo_L, hi_C, T)[1]


@given(lengths, loads, loads)
def test_buffer_shields_load(L, C1, C2):
    assert pattern_electrical(Pattern.P2, L, C1, T)[0] == pattern_electrical(Pattern.P2, L, C2, T)[0]


@given(lengths, loads)
def test_single_ntsv_patterns(L, C_d):
    c5, d5 = pattern_electrical(Pattern.P5, L, C_d, T)
    c6, d6 = pattern_electrical(Pattern.P6, L, C_d, T)
    assert c5 == c6
    # moving the nTSV from the sink end to the driver end: it now also
    # drives the wire cap, while the wire no longer drives the nTSV cap
    expected = T.r_ntsv * T.c_back * L - T.r_back * L * T.c_ntsv
    assert d6 - d5 == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_buffer_load():
    assert buffer_load(Pattern.P2, 10.0, 3.0, T) == pytest.approx(T.c_front * 5 + 3)
    assert buffer_load(Pattern.P1, 10.0, 3.0, T) == 0


def _single_edge():
    from dscts.model import ClockTree, NodeKind, Sink, TreeEdge, TreeNode
    s = Sink("a", Point(100, 0), 10.0)
    nodes = (TreeNode(0, Point(0, 0), NodeKind.ROOT), TreeNode(1, s.pos, NodeKind.SINK, "a"))
    return ClockTree(nodes, (TreeEdge(0, 0, 1, 100.0),), 0, (s,))


def test_single_edge_tree():
    t = _single_edge()
    m = evaluate_tree(t, all_p1(t), T).metrics
    assert m.latency == pattern_electrical(Pattern.P1, 100.0, 10.0, T)[1]
    assert m.skew == 0 and m.wl_front == 100 and m.wl_back == 0


def test_evaluate_counts_and_wirelength():
    t = _single_edge()
    m = evaluate_tree(t, (Pattern.P4,), T).metrics
    assert (m.n_buffers, m.n_ntsvs, m.wl_front, m.wl_back) == (0, 2, 0.0, 100.0)


def test_symmetric_tree_zero_skew():
    from dscts.model import ClockTree, NodeKind, Sink, TreeEdge, TreeNode
    sinks = (Sink("a", Point(-5, 0), 1.0), Sink("b", Point(5, 0), 1.0))
    nodes = (TreeNode(0, Point(0, -3), NodeKind.ROOT), TreeNode(1, Point(0, 0), NodeKind.INTERNAL),
             TreeNode(2, sinks[0].pos, NodeKind.SINK, "a"), TreeNode(3, sinks[1].pos, NodeKind.SINK, "b"))
    from dscts.model import TreeEdge as E
    t = ClockTree(nodes, (E(0, 0, 1, 3.0), E(1, 1, 2, 5.0), E(2, 1, 3, 5.0)), 0, sinks)
    for a in [(Pattern.P1,) * 3, (Pattern.P6, Pattern.P5, Pattern.P5), (Pattern.P1, Pattern.P2, Pattern.P2)]:
        assert evaluate_tree(t, a, T).metrics.skew == 0


def test_invalid_assignment_names_node():
    t = _single_edge()
    with pytest.raises(ConnectivityError) as exc:
        evaluate_tree(t, (Pattern.P3,), T)
    assert exc.value.node in (0, 1) and "node" in str(exc.value)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_evaluator_matches_recursive_oracle(n, seed):
    rng = np.random.default_rng(seed)
    tree = random_binary_tree(rng, n)
    res = bottom_up(tree, uniform_modes(tree, InsertMode.FULL), T)
    for cand in res.root_candidates()[:5]:
        a = top_down(res, cand)
        timing = evaluate_tree(tree, a, T)
        ref = sink_delays(tree, a, T)
        for s, d in ref.items():
            assert timing.sink_delays[s] == pytest.approx(d, rel=1e-9, abs=1e-12)
        assert timing.metrics.latency == pytest.approx(max(ref.values()), rel=1e-9)
        # the DP's own bookkeeping agrees with the evaluator
        assert timing.metrics.latency == pytest.approx(cand.max_delay, rel=1e-9)
        assert timing.root_eff_cap == pytest.approx(cand.eff_cap, rel=1e-9)
        assert (timing.metrics.n_buffers, timing.metrics.n_ntsvs) == (cand.n_buffers, cand.n_ntsvs)
