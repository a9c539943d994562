import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dscts.clustering import dual_level_cluster
from dscts.ingest import generate_benchmark
from dscts.model import NodeKind, Point, Sink, Technology, manhattan
from dscts.routing import (MergeRegion, Subtree, Tap, dme_route, hierarchical_route, route_flat,
                           sink_tap, zst_merge_pair)
from dscts.timing import all_p1, evaluate_tree

T = Technology()


def _tap(p, delay, cap):
    r = MergeRegion.at(p)
    return Tap(r, delay, cap, Subtree(r, pos=p))


def _branch_delays(tap):
    (a, ea), (b, eb) = tap.payload.children
    return ea, eb


def test_merge_identical_subtrees():
    a, b = _tap(Point(0, 0), 5.0, 2.0), _tap(Point(10, 0), 5.0, 2.0)
    m = zst_merge_pair(a, b, T)
    ea, eb = _branch_delays(m)
    assert ea == pytest.approx(5) and eb == pytest.approx(5)
    assert m.delay == pytest.approx(5 + T.r_front * 5 * (T.c_front * 5 + 2))
    assert m.cap == pytest.approx(T.c_front * 10 + 4)


def test_merge_zero_length():
    p = Point(1, 1)
    m = zst_merge_pair(_tap(p, 3.0, 0.0), _tap(p, 3.0, 0.0), T)
    assert _branch_delays(m) == (0.0, 0.0) and m.delay == 3.0


def test_merge_snaking():
    a, b = _tap(Point(0, 0), 100.0, 0.0), _tap(Point(10, 0), 0.0, 0.0)
    m = zst_merge_pair(a, b, T)
    ea, eb = _branch_delays(m)
    assert ea == 0.0
    # independent quadratic root of r c l^2 = 100
    expected = math.sqrt(100 / (T.r_front * T.c_front))
    assert eb == pytest.approx(expected, rel=1e-12)
    assert T.r_front * eb * (T.c_front * eb) == pytest.approx(100, abs=1e-9)


@given(st.floats(0, 200), st.floats(0, 200), st.floats(0, 20), st.floats(0, 20),
       st.floats(0, 300), st.floats(0, 300))
def test_merge_balances(da, db, ca, cb, x, y):
    a, b = _tap(Point(0, 0), da, ca), _tap(Point(x, y), db, cb)
    m = zst_merge_pair(a, b, T)
    ea, eb = _branch_delays(m)
    assert ea + eb >= manhattan(Point(0, 0), Point(x, y)) * (1 - 1e-12) - 1e-9
    left = da + T.r_front * ea * (T.c_front * ea + ca)
    right = db + T.r_front * eb * (T.c_front * eb + cb)
    assert left == pytest.approx(right, rel=1e-9, abs=1e-9)
    assert m.delay == pytest.approx(max(left, right), rel=1e-12)


def test_dme_single_tap():
    t = sink_tap(Sink("a", Point(1, 2), 1.0))
    assert dme_route([t], None, T) is t


def test_dme_two_symmetric_sinks():
    sinks = [Sink("a", Point(-4, 0), 1.0), Sink("b", Point(4, 0), 1.0)]
    top = dme_route([sink_tap(s) for s in sinks], Point(0, 0), T)
    assert top.payload.pos == Point(0, 0)
    tree = route_flat(sinks, Point(0, 0), T)
    assert evaluate_tree(tree, all_p1(tree), T).metrics.skew == 0


def _skew_ratio(tree):
    m = evaluate_tree(tree, all_p1(tree), T).metrics
    return m.skew / m.latency if m.latency else 0.0


def test_dme_thirty_sinks_zero_skew():
    inst = generate_benchmark(30, (200, 200), seed=3)
    assert _skew_ratio(route_flat(inst.sinks, inst.root_pos, T)) <= 1e-6


def test_route_single_sink():
    inst = generate_benchmark(1, (100, 100), seed=0)
    h = dual_level_cluster(inst.sinks, 3000, 30)
    tree = hierarchical_route(inst.sinks, inst.root_pos, h, T)
    assert len(tree.edges) == 1
    assert tree.edges[0].length == manhattan(inst.root_pos, inst.sinks[0].pos)


def test_route_square_corners():
    sinks = [Sink(f"s{i}", Point(x, y), 1.0) for i, (x, y) in
             enumerate([(0, 0), (100, 0), (0, 100), (100, 100)])]
    root = Point(50, 50)
    h = dual_level_cluster(sinks, 3000, 30)
    tree = hierarchical_route(sinks, root, h, T)
    assert _skew_ratio(tree) <= 1e-12
    assert tree.total_length() <= 2 * sum(manhattan(root, s.pos) for s in sinks)


@settings(max_examples=15)
@given(st.integers(1, 400), st.integers(0, 1000), st.sampled_from([(40, 10), (3000, 30), (100, 7)]))
def test_routed_tree_invariants(n, seed, caps):
    inst = generate_benchmark(n, (150, 150), seed=seed)
    h = dual_level_cluster(inst.sinks, *caps, seed=seed)
    tree = hierarchical_route(inst.sinks, inst.root_pos, h, T)
    assert tree.is_binary()
    assert sum(nd.kind is NodeKind.SINK for nd in tree.nodes) == n
    assert len(tree.edges) == 2 * n - 1   # root edge plus 2(n - 1) merge branches
    for e in tree.edges:
        assert e.length >= manhattan(tree.nodes[e.parent].pos, tree.nodes[e.child].pos) - 1e-9
    assert _skew_ratio(tree) <= 1e-6
    assert tree == hierarchical_route(inst.sinks, inst.root_pos, h, T)


def test_hierarchy_beats_flat_wirelength():
    wins = 0
    for seed in range(10):
        inst = generate_benchmark(3000, (1000, 1000), seed=seed)
        h = dual_level_cluster(inst.sinks, 3000, 30, seed=seed)
        hier = hierarchical_route(inst.sinks, inst.root_pos, h, T).total_length()
        flat = route_flat(inst.sinks, inst.root_pos, T).total_length()
        wins += hier < flat
    assert wins >= 8
