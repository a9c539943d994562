"""File formats and synthetic benchmarks.

Sink files are CSV with header ``id,x,y,cap``.  Technology files hold one
``key=value`` per line with ``#`` comments, keys being Technology field
names.  Trees use a versioned line format; floats are written with
``repr`` so every value reads back bit-identical.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import (Assignment, ClockTree, NodeKind, Pattern, Point, Sink, Technology,
                    TreeEdge, TreeMetrics, TreeNode, ValidationError)


class ParseError(ValidationError):
    """Malformed input; the message names the file line."""


@dataclass(frozen=True)
class Instance:
    sinks: tuple[Sink, ...]
    root_pos: Point
    tech: Technology = Technology()

    def __post_init__(self):
        object.__setattr__(self, "sinks", tuple(self.sinks))
        if not self.sinks:
            raise ValidationError("an instance needs at least one sink")
        ids = [s.id for s in self.sinks]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise ValidationError(f"duplicate sink id {dup!r}")


def bbox_center(sinks: Sequence[Sink]) -> Point:
    xs = [s.pos.x for s in sinks]
    ys = [s.pos.y for s in sinks]
    return Point((min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2)


# ---------------------------------------------------------------------------
# sinks and technology


def parse_sinks(text: str, source: str = "<sinks>") -> tuple[Sink, ...]:
    lines = text.splitlines()
    if not lines or [h.strip() for h in lines[0].split(",")] != ["id", "x", "y", "cap"]:
        raise ParseError(f"{source}:1: expected header 'id,x,y,cap'")
    sinks: list[Sink] = []
    seen: set[str] = set()
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise ParseError(f"{source}:{no}: expected 4 fields, got {len(parts)}")
        sid = parts[0]
        try:
            x, y, cap = (float(v) for v in parts[1:])
        except ValueError as exc:
            raise ParseError(f"{source}:{no}: {exc}") from None
        if sid in seen:
            raise ValidationError(f"{source}:{no}: duplicate sink id {sid!r}")
        if cap < 0:
            raise ValidationError(f"{source}:{no}: negative cap {cap} for sink {sid!r}")
        try:
            sinks.append(Sink(sid, Point(x, y), cap))
        except ValidationError as exc:
            raise ValidationError(f"{source}:{no}: {exc}") from None
        seen.add(sid)
    if not sinks:
        raise ValidationError(f"{source}: no sinks")
    return tuple(sinks)


def parse_tech(text: str, source: str = "<tech>") -> Technology:
    known = set(Technology.field_names())
    values: dict[str, float] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{source}:{no}: expected key=value")
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in known:
            raise ParseError(f"{source}:{no}: unknown key {key!r}")
        try:
            values[key] = float(val)
        except ValueError:
            raise ParseError(f"{source}:{no}: bad number {val!r}") from None
        if not math.isfinite(values[key]) or values[key] < 0:
            raise ValidationError(f"{source}:{no}: {key} must be finite and >= 0")
    return Technology(**values)


def format_tech(tech: Technology) -> str:
    return "".join(f"{f.name}={getattr(tech, f.name)!r}\n" for f in fields(tech))


def load_instance(sink_path: str | os.PathLike, tech_path: Optional[str | os.PathLike] = None,
                  root: Optional[Point] = None) -> Instance:
    """Read a sink CSV and optional tech file; the root defaults to the bbox centre."""
    sinks = parse_sinks(Path(sink_path).read_text(), str(sink_path))
    tech = parse_tech(Path(tech_path).read_text(), str(tech_path)) if tech_path else Technology()
    return Instance(sinks, root if root is not None else bbox_center(sinks), tech)


def format_sinks(sinks: Iterable[Sink]) -> str:
    out = ["id,x,y,cap"]
    out += [f"{s.id},{s.pos.x!r},{s.pos.y!r},{s.cap!r}" for s in sinks]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# synthetic benchmarks


@dataclass(frozen=True)
class Clustered:
    k: int
    spread: float


def parse_distribution(text: str):
    """``uniform`` or ``clustered:k:spread``."""
    if text == "uniform":
        return "uniform"
    parts = text.split(":")
    if len(parts) == 3 and parts[0] == "clustered":
        k, spread = int(parts[1]), float(parts[2])
        if k < 1 or spread < 0:
            raise ValueError("clustered needs k >= 1 and spread >= 0")
        return Clustered(k, spread)
    raise ValueError(f"unknown distribution {text!r}")


def generate_benchmark(n: int, region: tuple[float, float], distribution="uniform",
                       cap_range: tuple[float, float] = (0.5, 2.0), seed: int = 0,
                       tech: Technology = Technology()) -> Instance:
    """Random sinks in ``[0, W] x [0, H]``; the root sits at the region centre.

    ``clustered`` draws ``k`` centres uniformly and scatters sinks around
    them with a normal of standard deviation ``spread``, clipped to the
    region.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    W, H = region
    if not (W > 0 and H > 0):
        raise ValueError("region must have positive width and height")
    lo, hi = cap_range
    if not 0 <= lo <= hi:
        raise ValueError("cap range needs 0 <= lo <= hi")
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        xs, ys = rng.uniform(0, W, n), rng.uniform(0, H, n)
    elif isinstance(distribution, Clustered):
        centres = np.column_stack([rng.uniform(0, W, distribution.k),
                                   rng.uniform(0, H, distribution.k)])
        which = rng.integers(distribution.k, size=n)
        pts = centres[which] + rng.normal(0.0, distribution.spread, size=(n, 2))
        xs, ys = np.clip(pts[:, 0], 0, W), np.clip(pts[:, 1], 0, H)
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    caps = rng.uniform(lo, hi, n) if hi > lo else np.full(n, float(lo))
    sinks = tuple(Sink(f"s{i}", Point(float(x), float(y)), float(c))
                  for i, (x, y, c) in enumerate(zip(xs, ys, caps)))
    return Instance(sinks, Point(W / 2, H / 2), tech)


# ---------------------------------------------------------------------------
# tree documents

TREE_FORMAT = "dscts-tree"
TREE_VERSION = 1


def format_tree(tree: ClockTree, assignment: Optional[Assignment] = None) -> str:
    """Line format::

        dscts-tree 1
        sink <id> <x> <y> <cap>
        node <id> <root|internal|sink> <x> <y> [sink id]
        edge <id> <parent> <child> <length> [pattern]
        root <node id>
    """
    if assignment is not None and len(assignment) != len(tree.edges):
        raise ValidationError("assignment does not cover every edge")
    out = [f"{TREE_FORMAT} {TREE_VERSION}"]
    out += [f"sink {s.id} {s.pos.x!r} {s.pos.y!r} {s.cap!r}" for s in tree.sinks]
    for nd in tree.nodes:
        tail = f" {nd.sink}" if nd.sink is not None else ""
        out.append(f"node {nd.id} {nd.kind.value} {nd.pos.x!r} {nd.pos.y!r}{tail}")
    for e in tree.edges:
        tail = f" {assignment[e.id].name}" if assignment is not None else ""
        out.append(f"edge {e.id} {e.parent} {e.child} {e.length!r}{tail}")
    out.append(f"root {tree.root}")
    return "\n".join(out) + "\n"


def parse_tree(text: str, source: str = "<tree>") -> tuple[ClockTree, Optional[Assignment]]:
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"{source}:1: empty document")
    head = lines[0].split()
    if len(head) != 2 or head[0] != TREE_FORMAT:
        raise ParseError(f"{source}:1: not a {TREE_FORMAT} document")
    if head[1] != str(TREE_VERSION):
        raise ParseError(f"{source}:1: unsupported version {head[1]} (want {TREE_VERSION})")
    sinks, nodes, edges, pats = [], [], [], []
    root = None
    kinds = {k.value: k for k in NodeKind}
    for no, line in enumerate(lines[1:], start=2):
        f = line.split()
        if not f:
            continue
        try:
            if f[0] == "sink" and len(f) == 5:
                sinks.append(Sink(f[1], Point(float(f[2]), float(f[3])), float(f[4])))
            elif f[0] == "node" and len(f) in (5, 6):
                nodes.append(TreeNode(int(f[1]), Point(float(f[3]), float(f[4])), kinds[f[2]],
                                      f[5] if len(f) == 6 else None))
            elif f[0] == "edge" and len(f) in (5, 6):
                edges.append(TreeEdge(int(f[1]), int(f[2]), int(f[3]), float(f[4])))
                pats.append(Pattern[f[5]] if len(f) == 6 else None)
            elif f[0] == "root" and len(f) == 2 and root is None:
                root = int(f[1])
            else:
                raise ParseError(f"{source}:{no}: unrecognized record")
        except (ValueError, KeyError) as exc:
            raise ParseError(f"{source}:{no}: {exc}") from None
    if root is None:
        raise ParseError(f"{source}: missing root record")
    n = len(nodes)
    for e in edges:
        if not (0 <= e.parent < n and 0 <= e.child < n):
            raise ValidationError(f"{source}: edge {e.id} references a missing node")
    tree = ClockTree(tuple(nodes), tuple(edges), root, tuple(sinks))
    if all(p is None for p in pats):
        return tree, None
    if any(p is None for p in pats):
        raise ParseError(f"{source}: patterns must be given for all edges or none")
    return tree, tuple(pats)


def write_tree(path: str | os.PathLike, tree: ClockTree,
               assignment: Optional[Assignment] = None) -> None:
    Path(path).write_text(format_tree(tree, assignment))


def read_tree(path: str | os.PathLike) -> tuple[ClockTree, Optional[Assignment]]:
    return parse_tree(Path(path).read_text(), str(path))


# ---------------------------------------------------------------------------
# metrics tables

METRICS_HEADER = ("label", "latency_ps", "skew_ps", "wl_front_um", "wl_back_um", "buffers",
                  "ntsvs")


def metrics_fields(m: TreeMetrics) -> list[str]:
    return [repr(float(m.latency)), repr(float(m.skew)), repr(float(m.wl_front)),
            repr(float(m.wl_back)), str(m.n_buffers), str(m.n_ntsvs)]


def metrics_from_fields(vals: Sequence[str]) -> TreeMetrics:
    return TreeMetrics(float(vals[0]), float(vals[1]), float(vals[2]), float(vals[3]),
                       int(vals[4]), int(vals[5]))


def format_metrics_csv(rows: Sequence[tuple[str, TreeMetrics]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for label, m in rows:
        w.writerow([label, *metrics_fields(m)])
    return buf.getvalue()


def write_metrics_csv(path: str | os.PathLike, rows: Sequence[tuple[str, TreeMetrics]]) -> None:
    Path(path).write_text(format_metrics_csv(rows))


def parse_metrics_csv(text: str) -> list[tuple[str, TreeMetrics]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != METRICS_HEADER:
        raise ParseError("metrics CSV: bad header")
    return [(r[0], metrics_from_fields(r[1:])) for r in reader if r]


def read_metrics_csv(path: str | os.PathLike) -> list[tuple[str, TreeMetrics]]:
    return parse_metrics_csv(Path(path).read_text())
