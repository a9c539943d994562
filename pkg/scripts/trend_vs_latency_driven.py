#!/usr/bin/env python3
"""Concurrent pipeline against the latency-driven flip baseline on generated instances.

Writes one CSV row per instance and prints the mean ratios
(baseline / concurrent) for latency and nTSV count.
"""

import argparse
import csv
import math
import sys

import numpy as np

from dscts.baselines import LatencyDriven, compare
from dscts.ingest import generate_benchmark
from dscts.pipeline import RunConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--min-sinks", type=int, default=1000)
    ap.add_argument("--max-sinks", type=int, default=5000)
    ap.add_argument("--density", type=float, default=3.0, help="die edge = density * sqrt(N) um")
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=10.0)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=700)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    sizes = np.linspace(args.min_sinks, args.max_sinks, args.instances).round().astype(int)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["sinks", "ld_latency", "ld_ntsvs", "ours_latency", "ours_ntsvs", "ours_buffers"])
    lat, nt = [], []
    for i, n in enumerate(sizes):
        side = args.density * math.sqrt(n)
        inst = generate_benchmark(int(n), (side, side), seed=args.seed + i)
        cfg = RunConfig(alpha=args.alpha, beta=args.beta, gamma=args.gamma, seed=i)
        rows = {r.label: r.metrics for r in compare(inst, [LatencyDriven()], cfg)}
        ld, ours = rows["latency"], rows["concurrent"]
        w.writerow([n, ld.latency, ld.n_ntsvs, ours.latency, ours.n_ntsvs, ours.n_buffers])
        out.flush()
        lat.append(ld.latency / ours.latency)
        nt.append(ld.n_ntsvs / max(ours.n_ntsvs, 1))
    print(f"mean latency ratio {np.mean(lat):.3f}x, mean nTSV ratio {np.mean(nt):.2f}x, "
          f"lower latency on {sum(r > 1 for r in lat)}/{len(lat)}", file=sys.stderr)


if __name__ == "__main__":
    main()
