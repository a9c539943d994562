import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dscts.ingest import (Clustered, Instance, ParseError, format_metrics_csv, format_sinks,
                          format_tech, format_tree, generate_benchmark, load_instance,
                          parse_distribution, parse_metrics_csv, parse_sinks, parse_tech,
                          parse_tree)
from dscts.model import (PATTERNS, Point, Sink, Technology, TreeMetrics, ValidationError)
from dscts.pipeline import RunConfig, route_instance
from treegen import random_binary_tree

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
nonneg = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)
ident = st.text("abcdefghijklmnopqrstuvwxyz0123456789_./-", min_size=1, max_size=8)


@st.composite
def sink_lists(draw):
    ids = draw(st.lists(ident, min_size=1, max_size=20, unique=True))
    return [Sink(i, Point(draw(finite), draw(finite)), draw(nonneg)) for i in ids]


@settings(max_examples=1000)
@given(sink_lists())
def test_sink_csv_round_trip(sinks):
    assert list(parse_sinks(format_sinks(sinks))) == sinks


@settings(max_examples=1000)
@given(st.builds(Technology, *[nonneg] * len(Technology.field_names())))
def test_tech_round_trip(tech):
    assert parse_tech(format_tech(tech)) == tech


metrics = st.builds(TreeMetrics, nonneg, nonneg, nonneg, nonneg, st.integers(0, 10**6),
                    st.integers(0, 10**6))


@settings(max_examples=1000)
@given(st.lists(st.tuples(ident, metrics), max_size=6))
def test_metrics_csv_round_trip(rows):
    assert parse_metrics_csv(format_metrics_csv(rows)) == rows


@settings(max_examples=1000)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1), st.booleans())
def test_tree_round_trip(n, seed, with_assignment):
    rng = np.random.default_rng(seed)
    tree = random_binary_tree(rng, n)
    a = tuple(PATTERNS[i] for i in rng.integers(0, 6, len(tree.edges))) if with_assignment else None
    back, a2 = parse_tree(format_tree(tree, a))
    assert back == tree and a2 == a


def test_routed_tree_round_trip():
    inst = generate_benchmark(1000, (100, 100), seed=2)
    tree = route_instance(inst).tree
    back, a = parse_tree(format_tree(tree))
    assert back == tree and a is None


def test_tree_errors():
    rng = np.random.default_rng(0)
    text = format_tree(random_binary_tree(rng, 2))
    with pytest.raises(ParseError, match="version"):
        parse_tree(text.replace("dscts-tree 1", "dscts-tree 2"))
    lines = text.splitlines()
    bad = [ln if not ln.startswith("edge 1 ") else "edge 1 1 99 5.0" for ln in lines]
    with pytest.raises(ValidationError, match="missing node"):
        parse_tree("\n".join(bad))
    with pytest.raises(ParseError, match=":3:"):
        parse_tree("\n".join(lines[:2] + ["bogus"] + lines[2:]))


def test_minimal_sink_file(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("id,x,y,cap\ns1,0,0,1.0\n")
    inst = load_instance(p)
    assert len(inst.sinks) == 1 and inst.tech == Technology()
    assert inst.root_pos == Point(0, 0)


def test_tech_file_values(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("# table values\nr_front=0.024222\nc_front=0.12918\nr_back=0.000384\n"
                 "c_back=0.116264\nr_ntsv=0.020\nc_ntsv=0.004\n")
    t = parse_tech(p.read_text())
    assert (t.r_front, t.c_front, t.r_back, t.c_back, t.r_ntsv, t.c_ntsv) == \
        (0.024222, 0.12918, 0.000384, 0.116264, 0.020, 0.004)


@pytest.mark.parametrize("text,match", [
    ("id,x,y\ns1,0,0\n", ":1:"),
    ("id,x,y,cap\ns1,0,0,1\ns2,zero,0,1\n", ":3:"),
    ("id,x,y,cap\ns1,0,0,1\ns1,1,1,1\n", "duplicate"),
    ("id,x,y,cap\ns1,0,0,-1\n", "negative"),
])
def test_sink_errors(text, match):
    with pytest.raises(ValidationError, match=match):
        parse_sinks(text)


def test_tech_errors():
    with pytest.raises(ValidationError):
        parse_tech("nonsense=1\n")
    with pytest.raises(ValidationError):
        parse_tech("r_front\n")


def test_instance_validation():
    with pytest.raises(ValidationError):
        Instance((), Point(0, 0))


def test_metrics_csv_examples():
    assert format_metrics_csv([]) == "label,latency_ps,skew_ps,wl_front_um,wl_back_um,buffers,ntsvs\n"
    text = format_metrics_csv([("C1", TreeMetrics(77.694, 29.74, 1.0, 0.0, 3, 4))])
    assert len(text.splitlines()) == 2
    assert "77.694,29.74" in text


def test_generate_examples():
    one = generate_benchmark(1, (100, 100), "uniform", (1, 1), seed=0)
    assert len(one.sinks) == 1 and one.sinks[0].cap == 1
    a = generate_benchmark(1000, (1000, 1000), "uniform", (0.5, 2), seed=7)
    b = generate_benchmark(1000, (1000, 1000), "uniform", (0.5, 2), seed=7)
    assert format_sinks(a.sinks) == format_sinks(b.sinks)
    assert all(0 <= s.pos.x <= 1000 and 0 <= s.pos.y <= 1000 for s in a.sinks)
    assert all(0.5 <= s.cap <= 2 for s in a.sinks)
    with pytest.raises(ValueError):
        generate_benchmark(5, (0, 10))


def test_clustered_distribution_is_clustered():
    inst = generate_benchmark(100, (500, 500), Clustered(4, 30), (1, 1), seed=1)
    pts = np.array([(s.pos.x, s.pos.y) for s in inst.sinks])
    # regenerate the centre assignment independently from the same stream
    rng = np.random.default_rng(1)
    centres = np.column_stack([rng.uniform(0, 500, 4), rng.uniform(0, 500, 4)])
    which = rng.integers(4, size=100)
    within = np.mean([((pts[which == k] - pts[which == k].mean(0)) ** 2).sum(1).mean()
                      for k in range(4) if (which == k).any()])
    between = ((centres - centres.mean(0)) ** 2).sum(1).mean()
    assert within < between


def test_parse_distribution():
    assert parse_distribution("uniform") == "uniform"
    assert parse_distribution("clustered:4:30") == Clustered(4, 30.0)
    with pytest.raises(ValueError):
        parse_distribution("gaussian")
