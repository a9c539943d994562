import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dscts.ingest import generate_benchmark
from dscts.model import TreeMetrics, ValidationError, is_valid_assignment
from dscts.pipeline import RunConfig, insert_and_refine, modes_for, route_instance
from dscts.refine import (RefineParams, adaptive_t, cluster_roots, needs_refine, refine,
                          refine_count, select_clusters)
from dscts.timing import evaluate_tree
from conftest import region_for


@pytest.mark.parametrize("n,t", [(1000, 0.06), (6000, 0.06), (8000, 0.08), (10000, 0.1), (20000, 0.1)])
def test_adaptive_t_values(n, t):
    assert adaptive_t(n) == t


@given(st.integers(1, 30000), st.integers(1, 30000))
def test_adaptive_t_monotone(a, b):
    lo, hi = sorted((a, b))
    assert adaptive_t(lo) <= adaptive_t(hi)
    assert 0.06 <= adaptive_t(lo) <= 0.1


def test_adaptive_t_continuous():
    for n in (6000, 10000):
        assert abs(adaptive_t(n + 1) - adaptive_t(n)) <= 1.0001e-5   # slope 0.04 / 4000


@pytest.mark.parametrize("n,count", [(200, 12), (1000, 33), (8000, 33), (20000, 33)])
def test_refine_count(n, count):
    assert refine_count(n, 33) == count


@given(st.integers(1, 50000), st.integers(0, 100))
def test_refine_count_formula(n, m):
    t = Fraction(adaptive_t(n)).limit_denominator(10**6)
    assert refine_count(n, m) == min(math.floor(n * t), m)


@pytest.mark.parametrize("skew,expected", [(22, False), (24, True), (23, False)])
def test_needs_refine(skew, expected):
    assert needs_refine(TreeMetrics(100, skew, 0, 0, 0, 0), 23) is expected


def test_params_validation():
    with pytest.raises(ValidationError):
        RefineParams(p=101)
    with pytest.raises(ValidationError):
        RefineParams(m=-1)


@pytest.fixture(scope="module")
def triggered():
    """Pre-refinement results on 1000-sink instances whose skew trips the trigger."""
    cfg = RunConfig(refine_enabled=False)
    out = []
    for seed in range(12):
        inst = generate_benchmark(1000, region_for(1000), seed=seed)
        routed = route_instance(inst, cfg)
        res = insert_and_refine(routed, modes_for(routed.tree, cfg), cfg)
        if needs_refine(res.metrics, 23):
            out.append((routed, res))
        if len(out) == 4:
            break
    assert out, "no triggered instance found"
    return out


def test_refine_reduces_skew(triggered):
    for routed, res in triggered:
        tech = routed.instance.tech
        tree, a, m = refine(res.tree, res.assignment, routed.hierarchy, RefineParams(), tech)
        assert m.skew < res.metrics.skew
        assert is_valid_assignment(tree, a)
        t = evaluate_tree(tree, a, tech)
        assert t.metrics == m
        assert not t.cap_violations(tree, a, tech)
        assert m.n_buffers >= res.metrics.n_buffers and m.n_ntsvs >= res.metrics.n_ntsvs
        # every original sink is still driven; refinement only adds edges
        assert set(t.sink_delays) == {s.id for s in routed.instance.sinks}
        assert len(tree.edges) >= len(res.tree.edges)


def test_refine_fixpoint(triggered):
    for routed, res in triggered:
        tech = routed.instance.tech
        tree, a, m = refine(res.tree, res.assignment, routed.hierarchy, RefineParams(), tech)
        if not needs_refine(m, 23):
            assert refine(tree, a, routed.hierarchy, RefineParams(), tech) == (tree, a, m)


def test_refine_below_trigger_is_identity(triggered):
    routed, res = triggered[0]
    out = refine(res.tree, res.assignment, routed.hierarchy, RefineParams(p=100), routed.instance.tech)
    assert out[0] is res.tree and out[1] is res.assignment and out[2] == res.metrics


def test_refine_m_zero_is_identity(triggered):
    routed, res = triggered[0]
    tree, a, m = refine(res.tree, res.assignment, routed.hierarchy, RefineParams(m=0), routed.instance.tech)
    assert tree is res.tree and m == res.metrics


def test_slowest_first_order_still_legal(triggered):
    routed, res = triggered[0]
    tech = routed.instance.tech
    tree, a, m = refine(res.tree, res.assignment, routed.hierarchy, RefineParams(), tech,
                        order="slowest_first")
    assert is_valid_assignment(tree, a) and m.skew <= res.metrics.skew


def test_select_clusters_distinct(triggered):
    routed, res = triggered[0]
    t = evaluate_tree(res.tree, res.assignment, routed.instance.tech)
    picks = select_clusters(t.sink_delays, routed.hierarchy, 10)
    assert len(picks) == len(set(picks)) == 10
    fastest = min(t.sink_delays, key=t.sink_delays.get)
    assert picks[0] == routed.hierarchy.low_of_sink()[fastest]


def test_cluster_roots_cover_members(routed300):
    tree, h = routed300.tree, routed300.hierarchy
    roots = cluster_roots(tree, h)
    for c, node in zip(h.low_clusters, roots):
        below = set()
        stack = [node]
        while stack:
            v = stack.pop()
            nd = tree.nodes[v]
            if nd.sink:
                below.add(nd.sink)
            stack.extend(tree.edges[e].child for e in tree.children[v])
        assert set(c.members) <= below
