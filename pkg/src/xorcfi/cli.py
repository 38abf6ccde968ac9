"""Command-line front end: sample / build / generate / check."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .formula import export_xor_dimacs, import_xor_dimacs
from .pipeline import (
    GADGET_CORE,
    GADGET_FULL,
    PipelineConfig,
    build_graph,
    export_graph,
    generate,
    validate,
)
from .sampler import SampleConfig, sample_homogeneous
from .xorsat import SolveBudget


def _add_sampling_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="number of variables")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ratio", type=float, help="clause/variable ratio (m = round(ratio*n))")
    group.add_argument("--m", type=int, help="number of clauses")
    p.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
    p.add_argument("--count", type=int, default=1, help="number of trials")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, required=True, help="output directory")


def _budget(args) -> SolveBudget:
    if args.budget_decisions is None and args.budget_seconds is None:
        return SolveBudget(max_decisions=100_000)
    return SolveBudget(max_decisions=args.budget_decisions, max_seconds=args.budget_seconds)


def cmd_sample(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    for trial in range(args.count):
        cfg = SampleConfig(n=args.n, m=args.m, ratio=args.ratio, seed=args.seed)
        f = sample_homogeneous(cfg, trial)
        path = args.out / f"n{args.n:04d}_s{args.seed}_t{trial:04d}.xcnf"
        path.write_text(export_xor_dimacs(f), encoding="utf-8")
        print(path)
    return 0


def cmd_build(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    for formula_path in args.formula:
        try:
            f = import_xor_dimacs(Path(formula_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            print(f"error: {formula_path}: {exc}", file=sys.stderr)
            return 1
        g = build_graph(f, args.gadget)
        out_path = args.out / (Path(formula_path).stem + f".{args.format}")
        out_path.write_text(export_graph(g, args.format), encoding="utf-8")
        print(f"{out_path}  ({g.vertex_count} vertices, {g.edge_count} edges)")
    return 0


def cmd_generate(args) -> int:
    cfg = PipelineConfig(
        n=args.n,
        ratio=args.ratio,
        m=args.m,
        seed=args.seed,
        trials=args.count,
        gadget_mode=args.gadget,
        gauss_threshold=args.gauss_threshold,
        wl1_filter=args.wl1_filter,
        solver_budget=_budget(args),
        ir_budget=_budget(args),
        formats=tuple(args.format),
    )
    records = generate(cfg, args.out)
    print(f"accepted {len(records)}/{args.count} trials into {args.out}")
    for r in records:
        print(f"  {r.instance_id}: {r.vertices} vertices, {r.edges} edges, "
              f"gauss_ratio={r.gauss_ratio}")
    return 0


def cmd_check(args) -> int:
    failures = 0
    for manifest in args.manifest:
        report = validate(manifest)
        for check in report.checks:
            mark = "ok" if check.passed else "FAIL"
            detail = f"  ({check.detail})" if (check.detail and not check.passed) else ""
            print(f"{report.instance_id}: {check.name}: {mark}{detail}")
        if not report.ok:
            failures += 1
    print(f"{len(args.manifest) - failures}/{len(args.manifest)} instances valid")
    return 1 if failures else 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="xorcfi",
                                     description="generate graphs that are hard for "
                                                 "individualization-refinement isomorphism solvers")
    parser.add_argument("-v", "--verbose", action="store_true", help="log rejected trials")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="emit random homogeneous formulas only")
    _add_sampling_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("build", help="lift formula files into graphs")
    p.add_argument("formula", nargs="+", help="xor-extension DIMACS files")
    p.add_argument("--gadget", choices=[GADGET_FULL, GADGET_CORE], default=GADGET_FULL)
    p.add_argument("--format", choices=["dre", "dimacs"], default="dre")
    _add_output_args(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("generate", help="run the full sample/filter/build pipeline")
    _add_sampling_args(p)
    p.add_argument("--gadget", choices=[GADGET_FULL, GADGET_CORE], default=GADGET_FULL)
    p.add_argument("--gauss-threshold", type=float, default=5.0,
                   help="minimum decision-cost ratio to accept")
    p.add_argument("--wl1-filter", action="store_true",
                   help="also require refinement to keep every X^0/X^1 pair together")
    p.add_argument("--budget-decisions", type=int, default=None)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--format", choices=["dre", "dimacs"], action="append",
                   default=None, help="graph format(s) to write (repeatable)")
    _add_output_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("check", help="validate written instances")
    p.add_argument("manifest", nargs="+", help="manifest.txt paths")
    p.set_defaults(func=cmd_check)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "format", None) is None and args.command == "generate":
        args.format = ["dre"]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
