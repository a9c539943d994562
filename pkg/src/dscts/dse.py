"""Fanout-threshold sweeps over per-edge insert modes and Pareto extraction."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .dp import DPResult
from .ingest import Instance, metrics_fields
from .model import Assignment, ClockTree, InfeasibleError, TreeMetrics
from .pipeline import (Routed, RunConfig, insert_and_refine, mode_config_from_fanout,
                       route_instance)

OBJECTIVES = {
    "latency": lambda m: m.latency,
    "skew": lambda m: m.skew,
    "buffers": lambda m: m.n_buffers,
    "ntsvs": lambda m: m.n_ntsvs,
    "wl": lambda m: m.wirelength,
}

PARETO_HEADER = ("threshold", "latency_ps", "skew_ps", "wl_front_um", "wl_back_um", "buffers",
                 "ntsvs", "on_frontier")


@dataclass
class SweepPoint:
    threshold: int
    metrics: Optional[TreeMetrics]        # None when the point failed
    tree: Optional[ClockTree] = None
    assignment: Optional[Assignment] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.metrics is not None


def parse_thresholds(text: str) -> list[int]:
    """``start:stop:step`` (inclusive stop) or a comma list of integers."""
    if ":" in text:
        parts = [int(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError("range must be start:stop:step with step > 0")
        start, stop, step = parts
        out = list(range(start, stop + 1, step))
    else:
        out = [int(v) for v in text.split(",") if v.strip()]
    if not out:
        raise ValueError(f"empty threshold list {text!r}")
    if min(out) < 0:
        raise ValueError("thresholds must be >= 0")
    return out


def _run_block(routed: Routed, thresholds: Sequence[int], config: RunConfig) -> list[SweepPoint]:
    """Sequential points; each DP reuses the previous one's untouched subtrees."""
    out = []
    warm: Optional[DPResult] = None
    for t in thresholds:
        modes = mode_config_from_fanout(routed.tree, t)
        try:
            res = insert_and_refine(routed, modes, config, warm=warm)
        except InfeasibleError as exc:
            out.append(SweepPoint(t, None, error=str(exc)))
            continue
        warm = res.dp
        out.append(SweepPoint(t, res.metrics, res.tree, res.assignment))
    return out


def default_workers() -> int:
    env = os.environ.get("DSCTS_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(instance: Instance, thresholds: Sequence[int], config: RunConfig = RunConfig(),
          workers: Optional[int] = None, routed: Optional[Routed] = None) -> list[SweepPoint]:
    """Route once, then insert and refine at every threshold.

    Points come back in the order of ``thresholds``.  With several workers
    the thresholds are cut into contiguous blocks, one per process; results
    do not depend on the split because warm starts are exact.
    """
    if not thresholds:
        raise ValueError("no thresholds")
    routed = routed or route_instance(instance, config)
    order = sorted(range(len(thresholds)), key=lambda i: thresholds[i])
    ts = [thresholds[i] for i in order]
    workers = min(workers or default_workers(), len(ts))
    if workers <= 1:
        points = _run_block(routed, ts, config)
    else:
        size = -(-len(ts) // workers)
        blocks = [ts[i:i + size] for i in range(0, len(ts), size)]
        with ProcessPoolExecutor(len(blocks)) as ex:
            futs = [ex.submit(_run_block, routed, b, config) for b in blocks]
            points = [p for f in futs for p in f.result()]
    out: list[Optional[SweepPoint]] = [None] * len(ts)
    for i, p in zip(order, points):
        out[i] = p
    return out  # type: ignore[return-value]


def _vector(m: TreeMetrics, objectives: Sequence[str]) -> tuple:
    return tuple(OBJECTIVES[o](m) for o in objectives)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def pareto_filter(points: Sequence[SweepPoint],
                  objectives: Sequence[str] = ("latency", "ntsvs")) -> list[SweepPoint]:
    """Non-dominated successful points under minimization, ordered by threshold."""
    if not objectives:
        raise ValueError("need at least one objective")
    unknown = set(objectives) - set(OBJECTIVES)
    if unknown:
        raise ValueError(f"unknown objectives {sorted(unknown)}")
    good = [p for p in points if p.ok]
    vecs = [_vector(p.metrics, objectives) for p in good]
    keep = [p for p, v in zip(good, vecs) if not any(dominates(w, v) for w in vecs)]
    return sorted(keep, key=lambda p: p.threshold)


def format_pareto_csv(points: Sequence[SweepPoint], frontier: Sequence[SweepPoint]) -> str:
    on = {id(p) for p in frontier}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PARETO_HEADER)
    for p in points:
        if p.ok:
            w.writerow([p.threshold, *metrics_fields(p.metrics), int(id(p) in on)])
        else:
            w.writerow([p.threshold, "", "", "", "", "", "", 0])
    return buf.getvalue()


def parse_pareto_csv(text: str) -> list[tuple[int, Optional[TreeMetrics], bool]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != PARETO_HEADER:
        raise ValueError("pareto CSV: bad header")
    out = []
    for r in rows[1:]:
        if not r:
            continue
        m = None if r[1] == "" else TreeMetrics(float(r[1]), float(r[2]), float(r[3]),
                                                 float(r[4]), int(r[5]), int(r[6]))
        out.append((int(r[0]), m, r[7] == "1"))
    return out


def scatter_svg(points: Sequence[SweepPoint], frontier: Sequence[SweepPoint],
                x_objective: str = "ntsvs", width: int = 480, height: int = 360) -> str:
    """Static scatter of latency against one objective, frontier joined by a polyline."""
    good = [p for p in points if p.ok]
    pad = 50
    fx = OBJECTIVES[x_objective]
    xs = [float(fx(p.metrics)) for p in good] or [0.0]
    ys = [p.metrics.latency for p in good] or [0.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = (width - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (height - 2 * pad) / ((y1 - y0) or 1.0)

    def px(m):
        return (pad + (float(fx(m)) - x0) * sx, height - pad - (m.latency - y0) * sy)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
             'stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
             f'font-size="12">{x_objective} ({x0:g} to {x1:g})</text>',
             f'<text x="14" y="{height / 2:.1f}" font-size="12" text-anchor="middle" '
             f'transform="rotate(-90 14 {height / 2:.1f})">latency ps ({y0:.4g} to {y1:.4g})'
             '</text>']
    for p in good:
        x, y = px(p.metrics)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="#8899aa"/>')
    front = sorted(frontier, key=lambda p: (float(fx(p.metrics)), p.metrics.latency))
    if front:
        pts = " ".join("{:.2f},{:.2f}".format(*px(p.metrics)) for p in front)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#cc3311" stroke-width="1.5"/>')
        for p in front:
            x, y = px(p.metrics)
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="#cc3311"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
