#!/usr/bin/env python3
"""Before/after skew refinement on generated instances.

For every instance whose skew trips the trigger, report the relative skew
reduction next to the relative latency and buffer increase.
"""

import argparse
import math

from dscts.ingest import generate_benchmark
from dscts.pipeline import RunConfig, insert_and_refine, modes_for, route_instance
from dscts.refine import needs_refine


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sinks", type=int, default=1000)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--order", choices=["fastest_first", "slowest_first"], default="fastest_first")
    args = ap.parse_args(argv)
    cfg = RunConfig(refine_order=args.order)
    side = 3.0 * math.sqrt(args.sinks)
    print("seed,skew_before,skew_after,d_skew_pct,d_latency_pct,d_buffers")
    for seed in range(args.instances):
        inst = generate_benchmark(args.sinks, (side, side), seed=seed)
        routed = route_instance(inst, cfg)
        res = insert_and_refine(routed, modes_for(routed.tree, cfg), cfg)
        a, b = res.pre_refine, res.metrics
        if not needs_refine(a, cfg.p_skew):
            continue
        print(f"{seed},{a.skew:.3f},{b.skew:.3f},{100 * (b.skew - a.skew) / a.skew:.1f},"
              f"{100 * (b.latency - a.latency) / a.latency:.2f},{b.n_buffers - a.n_buffers}")


if __name__ == "__main__":
    main()
