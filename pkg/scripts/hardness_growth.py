#!/usr/bin/env python3
"""Growth study: generate instances across an n grid and run the internal
IR solver on each, recording search nodes as the machine-independent cost.

Example:
    python scripts/hardness_growth.py --ns 15 20 25 30 --ratio 1.0 \
        --count 5 --gadget core --seed 5000 --out runs/growth
"""

import argparse
import statistics
import sys
from pathlib import Path

from xorcfi.bench import run_internal, write_summary
from xorcfi.pipeline import PipelineConfig, build_graph, run_trial


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ns", type=int, nargs="+", default=[15, 20, 25, 30])
    parser.add_argument("--ratio", type=float, default=1.0)
    parser.add_argument("--count", type=int, default=5, help="accepted instances per n")
    parser.add_argument("--seed", type=int, default=5000)
    parser.add_argument("--gadget", choices=["full", "core"], default="core")
    parser.add_argument("--gauss-threshold", type=float, default=1.0)
    parser.add_argument("--max-trials", type=int, default=500)
    parser.add_argument("--max-nodes", type=int, default=5_000_000)
    parser.add_argument("--timeout", type=float, default=300.0)
    parser.add_argument("--cell-strategy", default="first-smallest",
                        choices=["first-smallest", "first-largest"])
    parser.add_argument("--out", type=Path, required=True)
    args = parser.parse_args(argv)

    results = []
    for n in args.ns:
        m = round(args.ratio * n)
        cfg = PipelineConfig(n=n, m=m, seed=args.seed, trials=args.max_trials,
                             gadget_mode=args.gadget,
                             gauss_threshold=args.gauss_threshold)
        nodes = []
        trial = 0
        while len(nodes) < args.count and trial < args.max_trials:
            outcome = run_trial(cfg, trial)
            trial += 1
            if not outcome.accepted:
                continue
            g = build_graph(outcome.formula, args.gadget)
            res = run_internal(g, timeout=args.timeout,
                               instance=outcome.record.instance_id,
                               cell_strategy=args.cell_strategy,
                               max_nodes=args.max_nodes)
            results.append(res.with_meta(n, m, g.vertex_count))
            nodes.append(res.nodes)
            print(f"n={n} {outcome.record.instance_id}: {res.status} "
                  f"nodes={res.nodes} time={res.time_s:.2f}s")
        if nodes:
            print(f"n={n}: median nodes {statistics.median(nodes)} "
                  f"over {len(nodes)} instances")
    write_summary(results, args.out)
    print(f"wrote results.csv, growth.txt and .dat files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
