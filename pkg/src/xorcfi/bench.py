"""Benchmark harness: external GI solvers and the internal IR solver.

External solvers run as child processes with a wall-clock timeout; a
timed-out run records the limit itself as its time, so timed-out points
sit on the timeout line when plotted. Missing binaries degrade to an
ERROR result and the batch continues. Instance files are never touched.
"""

from __future__ import annotations

import csv
import io
import math
import re
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .canon import CELL_FIRST_SMALLEST, STATUS_COMPLETE, ir_automorphisms
from .cfi import Graph
from .pipeline import from_dre, to_dimacs_graph
from .xorsat import SolveBudget

STATUS_OK = "OK"
STATUS_TIMEOUT = "TIMEOUT"
STATUS_ERROR = "ERROR"

MISSING_SOLVER = "MISSING_SOLVER"


@dataclass(frozen=True)
class BenchResult:
    instance: str
    solver: str
    version: str
    time_s: float
    status: str
    group_size: Optional[int] = None
    nodes: Optional[int] = None
    error: Optional[str] = None
    n_vars: Optional[int] = None
    m: Optional[int] = None
    vertices: Optional[int] = None

    def with_meta(self, n_vars: int, m: int, vertices: int) -> "BenchResult":
        return BenchResult(self.instance, self.solver, self.version, self.time_s,
                           self.status, self.group_size, self.nodes, self.error,
                           n_vars, m, vertices)


@dataclass(frozen=True)
class SolverAdapter:
    """How to invoke one external solver on a .dre instance."""

    name: str
    binary: str
    input_format: str  # "dre-stdin" feeds dreadnaut commands; "dimacs-arg" passes a converted file
    prelude: str = ""  # dreadnaut mode commands sent before the graph
    group_pattern: str = r"grpsize=([0-9.eE+]+)"
    version_pattern: str = r"[Vv]ersion\s+([0-9][0-9.]*)"


ADAPTERS: Dict[str, SolverAdapter] = {
    "traces": SolverAdapter("traces", "dreadnaut", "dre-stdin", prelude="At"),
    "nauty": SolverAdapter("nauty", "dreadnaut", "dre-stdin", prelude="As"),
    "bliss": SolverAdapter("bliss", "bliss", "dimacs-arg",
                           group_pattern=r"\|Aut\|\s*[:=]\s*([0-9.eE+*^ ]+)"),
    "conauto": SolverAdapter("conauto", "conauto", "dimacs-arg",
                             group_pattern=r"[Aa]utomorphism group size\s*[:=]?\s*([0-9.eE+]+)"),
}


def _parse_group_size(text: str, pattern: str) -> Optional[int]:
    match = re.search(pattern, text)
    if not match:
        return None
    token = match.group(1).strip()
    try:
        value = float(token)
    except ValueError:
        return None
    if not math.isfinite(value) or value < 1:
        return None
    return round(value)


def _parse_version(text: str, pattern: str) -> str:
    match = re.search(pattern, text)
    return match.group(1) if match else "unknown"


def run_external(solver: str, dre_file: Union[str, Path], timeout: float) -> BenchResult:
    """Launch one solver on one .dre file; never raises on child failure."""
    if solver not in ADAPTERS:
        raise ValueError(f"unknown solver adapter {solver!r}; known: {sorted(ADAPTERS)}")
    adapter = ADAPTERS[solver]
    dre_path = Path(dre_file)
    instance = dre_path.parent.name or dre_path.stem
    if shutil.which(adapter.binary) is None:
        return BenchResult(instance, solver, "unknown", 0.0, STATUS_ERROR, error=MISSING_SOLVER)
    try:
        dre_text = dre_path.read_text(encoding="utf-8")
    except OSError as exc:
        return BenchResult(instance, solver, "unknown", 0.0, STATUS_ERROR, error=str(exc))

    tmp_path: Optional[Path] = None
    if adapter.input_format == "dre-stdin":
        argv = [adapter.binary]
        stdin_text = (adapter.prelude + "\n" if adapter.prelude else "") + dre_text + "x\nq\n"
    else:
        graph = from_dre(dre_text)
        tmp = tempfile.NamedTemporaryFile("w", suffix=".dimacs", delete=False, encoding="utf-8")
        tmp.write(to_dimacs_graph(graph))
        tmp.close()
        tmp_path = Path(tmp.name)
        argv = [adapter.binary, str(tmp_path)]
        stdin_text = ""

    start = time.monotonic()
    try:
        proc = subprocess.run(argv, input=stdin_text, capture_output=True,
                              text=True, timeout=timeout)
        elapsed = time.monotonic() - start
        output = proc.stdout + "\n" + proc.stderr
        version = _parse_version(output, adapter.version_pattern)
        if proc.returncode != 0:
            return BenchResult(instance, solver, version, elapsed, STATUS_ERROR,
                               error=f"exit {proc.returncode}: {proc.stderr.strip()[:200]}")
        return BenchResult(instance, solver, version, elapsed, STATUS_OK,
                           group_size=_parse_group_size(output, adapter.group_pattern))
    except subprocess.TimeoutExpired:
        return BenchResult(instance, solver, "unknown", float(timeout), STATUS_TIMEOUT)
    except OSError as exc:
        return BenchResult(instance, solver, "unknown", 0.0, STATUS_ERROR, error=str(exc))
    finally:
        if tmp_path is not None:
            tmp_path.unlink(missing_ok=True)


def run_internal(
    g: Graph,
    timeout: Optional[float] = None,
    instance: str = "",
    cell_strategy: str = CELL_FIRST_SMALLEST,
    max_nodes: Optional[int] = None,
) -> BenchResult:
    """IR solver run; node count is the machine-independent cost."""
    budget = SolveBudget(max_decisions=max_nodes, max_seconds=timeout)
    start = time.monotonic()
    report = ir_automorphisms(g, budget=budget, cell_strategy=cell_strategy)
    elapsed = time.monotonic() - start
    if report.status == STATUS_COMPLETE:
        return BenchResult(instance, "internal-ir", "0", elapsed, STATUS_OK,
                           group_size=report.group_size, nodes=report.search_nodes)
    recorded = float(timeout) if timeout is not None else elapsed
    return BenchResult(instance, "internal-ir", "0", recorded, STATUS_TIMEOUT,
                       nodes=report.search_nodes)


CSV_COLUMNS = ("instance", "n_vars", "m", "vertices", "solver", "time", "status", "nodes")


def results_csv(results: Sequence[BenchResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_COLUMNS)
    for r in sorted(results, key=lambda r: (r.instance, r.solver)):
        writer.writerow([
            r.instance,
            "" if r.n_vars is None else r.n_vars,
            "" if r.m is None else r.m,
            "" if r.vertices is None else r.vertices,
            r.solver,
            f"{r.time_s:.6f}",
            r.status,
            "" if r.nodes is None else r.nodes,
        ])
    return buf.getvalue()


def _cost_of(r: BenchResult) -> Optional[float]:
    if r.nodes is not None:
        return float(r.nodes)
    if r.status == STATUS_OK:
        return r.time_s
    return None


def growth_report(results: Sequence[BenchResult]) -> str:
    """Per-solver log(cost) vs vertices fit; a ratio line below 3 points."""
    lines = []
    by_solver: Dict[str, List[Tuple[int, float]]] = {}
    for r in results:
        cost = _cost_of(r)
        if cost is None or cost <= 0 or r.vertices is None:
            continue
        by_solver.setdefault(r.solver, []).append((r.vertices, cost))
    if not by_solver:
        return "no data\n"
    for solver in sorted(by_solver):
        points = sorted(by_solver[solver])
        if len(points) < 2:
            lines.append(f"{solver}: {len(points)} point(s), nothing to compare")
            continue
        if len(points) < 3:
            (v0, c0), (v1, c1) = points[0], points[-1]
            lines.append(f"{solver}: cost ratio {c1 / c0:.3f} from {v0} to {v1} vertices (no fit)")
            continue
        xs = np.array([p[0] for p in points], dtype=float)
        ys = np.log(np.array([p[1] for p in points], dtype=float))
        slope, intercept = np.polyfit(xs, ys, 1)
        doubling = math.log(2) / slope if slope > 0 else float("inf")
        lines.append(
            f"{solver}: log-cost slope {slope:.6f} per vertex over {len(points)} points"
            f" (cost doubles every {doubling:.1f} vertices)"
            if slope > 0 else
            f"{solver}: log-cost slope {slope:.6f} per vertex over {len(points)} points (not growing)"
        )
    return "\n".join(lines) + "\n"


def summarize(results: Sequence[BenchResult]) -> Tuple[str, str]:
    """(csv table, growth report) for a batch of results."""
    return results_csv(results), growth_report(results)


def write_summary(results: Sequence[BenchResult], out_dir: Union[str, Path]) -> None:
    """results.csv, growth.txt and per-solver '<solver>.dat' plot files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_text, report = summarize(results)
    (out / "results.csv").write_text(csv_text, encoding="utf-8")
    (out / "growth.txt").write_text(report, encoding="utf-8")
    by_solver: Dict[str, List[Tuple[int, float]]] = {}
    for r in results:
        cost = _cost_of(r)
        if cost is None or r.vertices is None:
            continue
        by_solver.setdefault(r.solver, []).append((r.vertices, cost))
    for solver, points in by_solver.items():
        body = "".join(f"{v} {c:.6f}\n" for v, c in sorted(points))
        (out / f"{solver}.dat").write_text("# vertices cost\n" + body, encoding="utf-8")
