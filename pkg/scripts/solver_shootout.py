#!/usr/bin/env python3
"""Run a generated instance directory through external GI solvers and the
internal IR solver, producing the comparison CSV and growth report.

External solvers (dreadnaut/Traces, nauty, bliss, conauto) are used when
their binaries are on PATH; missing ones degrade to ERROR rows and the
batch keeps going.

Example:
    xorcfi generate --n 30 --ratio 1.0 --seed 5000 --count 50 \
        --gauss-threshold 1 --out runs/batch
    python scripts/solver_shootout.py runs/batch --timeout 60 \
        --solvers traces nauty bliss internal --out runs/shootout
"""

import argparse
import sys
from pathlib import Path

from xorcfi.bench import run_external, run_internal, write_summary
from xorcfi.pipeline import from_dre, parse_manifest

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("batch_dir", type=Path, help="directory written by `xorcfi generate`")
    parser.add_argument("--solvers", nargs="+",
                        default=["traces", "nauty", "bliss", "conauto", "internal"])
    parser.add_argument("--timeout", type=float, default=120.0)
    parser.add_argument("--max-nodes", type=int, default=10_000_000)
    parser.add_argument("--out", type=Path, required=True)
    args = parser.parse_args(argv)

    manifests = sorted(args.batch_dir.glob("*/manifest.txt"))
    if not manifests:
        print(f"no manifests under {args.batch_dir}", file=sys.stderr)
        return 1
    results = []
    for manifest_path in manifests:
        record = parse_manifest(manifest_path.read_text(encoding="utf-8"))
        if record.graph_dre is None:
            print(f"{record.instance_id}: no .dre file, skipped", file=sys.stderr)
            continue
        dre_path = args.batch_dir / record.graph_dre
        for solver in args.solvers:
            if solver == "internal":
                g = from_dre(dre_path.read_text(encoding="utf-8"))
                res = run_internal(g, timeout=args.timeout,
                                   instance=record.instance_id,
                                   max_nodes=args.max_nodes)
            else:
                res = run_external(solver, dre_path, timeout=args.timeout)
            res = res.with_meta(record.n, record.m, record.vertices)
            results.append(res)
            extra = f" ({res.error})" if res.error else ""
            print(f"{record.instance_id} {solver}: {res.status} "
                  f"time={res.time_s:.2f}s group={res.group_size}{extra}")
    write_summary(results, args.out)
    print(f"wrote results.csv, growth.txt and .dat files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
