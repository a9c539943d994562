"""Command-line entry point.

Exit codes: 0 success, 1 infeasible or invalid input, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .baselines import compare, parse_baseline
from .dse import (OBJECTIVES, format_pareto_csv, pareto_filter, parse_thresholds, scatter_svg,
                  sweep)
from .ingest import (Instance, format_metrics_csv, format_sinks, generate_benchmark,
                     load_instance, parse_distribution, parse_tech, read_tree, write_tree)
from .model import InfeasibleError, InsertMode, Point, Technology, ValidationError
from .pipeline import RunConfig, route_instance, run
from .refine import REFINE_ORDERS
from .timing import all_p1, evaluate_tree


class UsageError(Exception):
    pass


def _pair(text: str, sep: str = ":") -> tuple[float, float]:
    parts = text.split(sep)
    if len(parts) != 2:
        raise UsageError(f"expected lo{sep}hi, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"bad number in {text!r}") from None


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sinks", required=True, help="sink CSV (id,x,y,cap)")
    p.add_argument("--tech", help="technology key=value file (defaults built in)")
    p.add_argument("--root", nargs=2, type=float, metavar=("X", "Y"),
                   help="clock root position (default: sink bounding-box centre)")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hc", type=int, default=3000, help="high-level cluster capacity")
    p.add_argument("--lc", type=int, default=30, help="low-level cluster capacity")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--p", type=float, default=23.0, help="refinement trigger, percent")
    p.add_argument("--m", type=int, default=33, help="max refined end-points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=RunConfig.limit,
                   help="extra DP candidates kept per node side beyond the (cap, delay) front")
    p.add_argument("--refine-order", choices=REFINE_ORDERS, default="fastest_first")


def _add_mode_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fanout", type=int, help="Full below this downstream sink count")
    g.add_argument("--mode", choices=[m.value for m in InsertMode], default="full")


def _instance(args) -> Instance:
    root = Point(*args.root) if args.root else None
    return load_instance(args.sinks, args.tech, root)


def _config(args, with_mode: bool = True) -> RunConfig:
    kw = dict(hc=args.hc, lc=args.lc, alpha=args.alpha, beta=args.beta, gamma=args.gamma,
              p_skew=args.p, m_refine=args.m, seed=args.seed, limit=args.limit,
              refine_order=args.refine_order)
    if with_mode:
        kw.update(fanout_threshold=args.fanout, mode=InsertMode(args.mode))
    try:
        return RunConfig(**kw)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None


def _write(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_gen(args) -> int:
    if args.sinks < 1:
        raise UsageError("--sinks must be >= 1")
    lo, hi = _pair(args.cap)
    if not 0 <= lo <= hi:
        raise UsageError("--cap needs 0 <= lo <= hi")
    if not (args.region[0] > 0 and args.region[1] > 0):
        raise UsageError("--region must be positive")
    try:
        dist = parse_distribution(args.dist)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    inst = generate_benchmark(args.sinks, tuple(args.region), dist, (lo, hi), args.seed)
    _write(args.out, format_sinks(inst.sinks))
    return 0


def cmd_route(args) -> int:
    inst = _instance(args)
    routed = route_instance(inst, _config(args, with_mode=False))
    if args.out_tree:
        write_tree(args.out_tree, routed.tree)
    m = evaluate_tree(routed.tree, all_p1(routed.tree), inst.tech).metrics
    _write(args.out_metrics, format_metrics_csv([("routed", m)]))
    return 0


def cmd_run(args) -> int:
    inst = _instance(args)
    res = run(inst, _config(args))
    if args.out_tree:
        write_tree(args.out_tree, res.tree, res.assignment)
    _write(args.out_metrics, format_metrics_csv([("concurrent", res.metrics)]))
    return 0


def cmd_sweep(args) -> int:
    try:
        thresholds = parse_thresholds(args.thresholds)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    objectives = [o for o in args.objectives.split(",") if o]
    if not objectives or set(objectives) - set(OBJECTIVES):
        raise UsageError(f"objectives must be a subset of {sorted(OBJECTIVES)}")
    inst = _instance(args)
    points = sweep(inst, thresholds, _config(args, with_mode=False), workers=args.workers)
    front = pareto_filter(points, objectives)
    _write(args.out_pareto, format_pareto_csv(points, front))
    if args.svg:
        x_obj = next((o for o in objectives if o != "latency"), "ntsvs")
        Path(args.svg).write_text(scatter_svg(points, front, x_obj))
    return 0


def cmd_compare(args) -> int:
    try:
        specs = [parse_baseline(b) for b in args.baselines.split(",") if b]
    except (ValueError, ValidationError) as exc:
        raise UsageError(str(exc)) from None
    inst = _instance(args)
    rows = compare(inst, specs, _config(args))
    _write(args.out, format_metrics_csv([(r.label, r.metrics) for r in rows]))
    return 0


def cmd_eval(args) -> int:
    tree, assignment = read_tree(args.tree)
    tech = parse_tech(Path(args.tech).read_text(), args.tech) if args.tech else Technology()
    timing = evaluate_tree(tree, assignment or all_p1(tree), tech)
    _write(args.out, format_metrics_csv([("eval", timing.metrics)]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dscts", description="Double-side clock tree synthesis")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic sink CSV")
    p.add_argument("--sinks", type=int, required=True)
    p.add_argument("--region", nargs=2, type=float, metavar=("W", "H"), default=(1000.0, 1000.0))
    p.add_argument("--dist", default="uniform", help="uniform | clustered:k:spread")
    p.add_argument("--cap", default="0.5:2", help="sink cap range lo:hi in fF")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("route", help="cluster and route; write the bare tree")
    _add_instance_args(p)
    _add_config_args(p)
    p.add_argument("--out-tree")
    p.add_argument("--out-metrics", default="-", help="all-P1 metrics of the routed tree")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("run", help="full pipeline on one instance")
    _add_instance_args(p)
    _add_config_args(p)
    _add_mode_args(p)
    p.add_argument("--out-tree")
    p.add_argument("--out-metrics", default="-")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="fanout-threshold exploration with Pareto output")
    _add_instance_args(p)
    _add_config_args(p)
    p.add_argument("--thresholds", default="20:1000:10", help="start:stop:step or a,b,c")
    p.add_argument("--objectives", default="latency,ntsvs")
    p.add_argument("--out-pareto", default="-")
    p.add_argument("--svg")
    p.add_argument("--workers", type=int, help="processes (default: DSCTS_WORKERS or CPU count)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="buffered tree, flip baselines and concurrent pipeline")
    _add_instance_args(p)
    _add_config_args(p)
    _add_mode_args(p)
    p.add_argument("--baselines", default="latency,fanout:100,critical:0.5",
                   help="comma list of latency | fanout:F | critical:q (empty for none)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("eval", help="evaluate a stored tree document")
    p.add_argument("--tree", required=True)
    p.add_argument("--tech")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_eval)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dscts {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, InfeasibleError, OSError) as exc:
        print(f"dscts {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
