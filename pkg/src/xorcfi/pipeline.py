"""End-to-end instance generation: sample, filter, lift, export.

Per trial: draw a homogeneous formula from its own RNG stream, reject
unless it survives the enabled filters (incidence-graph asymmetry in
core-only mode, full rank, Gaussian decision-cost gap, optionally a
refinement non-separation check), then build the lifted graph and write
formula + graph + manifest with a content digest. Everything written is
a pure function of the config, so a rerun reproduces the tree byte for
byte.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from . import __version__
from .canon import color_refine, ir_automorphisms
from .cfi import Graph, VertexScheme, build_core, build_full, incidence_graph
from .formula import XorFormula, export_xor_dimacs, import_xor_dimacs, is_uniquely_satisfiable, to_matrix
from .gf2 import rank
from .sampler import SampleConfig, sample_homogeneous
from .xorsat import BUDGET_EXHAUSTED, SolveBudget, UNSAT, gauss_ratio, nontrivial_query, solve

logger = logging.getLogger(__name__)

GADGET_FULL = "full"
GADGET_CORE = "core"

MANIFEST_SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.txt"
FORMULA_NAME = "formula.xcnf"
DRE_NAME = "graph.dre"
DIMACS_NAME = "graph.dimacs"

REJECT_PHI_SYMMETRIC = "phi_symmetric"
REJECT_NOT_UNIQUE = "not_uniquely_satisfiable"
REJECT_LOW_RATIO = "low_gauss_ratio"
REJECT_WL1 = "wl1_separates"
REJECT_BUDGET = "BUDGET"


@dataclass(frozen=True)
class PipelineConfig:
    n: int
    ratio: Optional[float] = None
    m: Optional[int] = None
    seed: int = 0
    trials: int = 1
    gadget_mode: str = GADGET_FULL
    gauss_threshold: float = 5.0
    wl1_filter: bool = False
    sat_cross_check: bool = False
    solver_budget: SolveBudget = SolveBudget(max_decisions=100_000)
    ir_budget: SolveBudget = SolveBudget(max_decisions=50_000)
    formats: Tuple[str, ...] = ("dre",)

    def __post_init__(self):
        if self.gadget_mode not in (GADGET_FULL, GADGET_CORE):
            raise ValueError(f"unknown gadget mode {self.gadget_mode!r}")
        if self.m is None and self.ratio is None:
            raise ValueError("one of m or ratio is required")
        if self.effective_m < self.n:
            raise ValueError(
                "clause/variable ratio below 1 can never be uniquely satisfiable "
                f"(m={self.effective_m} < n={self.n})"
            )
        if self.effective_m > math.comb(self.n, 3):
            raise ValueError("more clauses requested than distinct variable triples")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        for fmt in self.formats:
            if fmt not in ("dre", "dimacs"):
                raise ValueError(f"unknown graph format {fmt!r}")
        if self.solver_budget.max_decisions is None and self.solver_budget.max_seconds is None:
            raise ValueError("solver budget must be bounded")
        if self.ir_budget.max_decisions is None and self.ir_budget.max_seconds is None:
            raise ValueError("ir budget must be bounded")

    @property
    def effective_m(self) -> int:
        return self.m if self.m is not None else round(self.ratio * self.n)


@dataclass(frozen=True)
class InstanceRecord:
    instance_id: str
    n: int
    m: int
    seed: int
    trial: int
    gadget_mode: str
    clause_digest: str
    phi_asymmetric: Optional[bool]
    uniquely_satisfiable: bool
    gauss_ratio: float
    wl1_nonseparating: Optional[bool]
    vertices: int
    edges: int
    formula_file: str
    graph_dre: Optional[str]
    graph_dimacs: Optional[str]
    manifest_file: str
    tool_version: str


# ---------------------------------------------------------------------------
# Graph file formats.


def to_dre(g: Graph) -> str:
    """dreadnaut text: each edge emitted once from its smaller endpoint."""
    higher: List[List[int]] = [[] for _ in range(g.vertex_count)]
    for u, v in sorted(g.edges):
        higher[u].append(v)
    lines = [f"n={g.vertex_count} $=0 g"]
    body = [f"{v} : {' '.join(str(w) for w in sorted(ws))}" for v, ws in enumerate(higher) if ws]
    if not body:
        lines.append(".")
    else:
        lines.extend(f"{row};" for row in body[:-1])
        lines.append(f"{body[-1]}.")
    return "\n".join(lines) + "\n"


def from_dre(text: str) -> Graph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError("missing dreadnaut header")
    head = lines[0].split()
    n = int(head[0][2:])
    edges = set()
    for ln in lines[1:]:
        terminated = ln.endswith(".")
        ln = ln.rstrip(".;").strip()
        if ln:
            left, _, right = ln.partition(":")
            u = int(left)
            for tok in right.split():
                edges.add((u, int(tok)))
        if terminated:
            break
    return Graph.from_edges(n, edges)


def to_dimacs_graph(g: Graph) -> str:
    lines = [f"p edge {g.vertex_count} {g.edge_count}"]
    for u, v in sorted(g.edges):
        lines.append(f"e {u + 1} {v + 1}")
    return "\n".join(lines) + "\n"


def from_dimacs_graph(text: str) -> Graph:
    n = None
    declared = None
    edges = set()
    for lineno, ln in enumerate(text.splitlines(), start=1):
        ln = ln.strip()
        if not ln or ln.startswith("c"):
            continue
        if ln.startswith("p"):
            parts = ln.split()
            if len(parts) != 4 or parts[1] != "edge":
                raise ValueError(f"line {lineno}: bad graph header {ln!r}")
            n, declared = int(parts[2]), int(parts[3])
            continue
        if ln.startswith("e"):
            _, u, v = ln.split()
            edges.add((int(u) - 1, int(v) - 1))
            continue
        raise ValueError(f"line {lineno}: unexpected line {ln!r}")
    if n is None:
        raise ValueError("missing graph header")
    if declared is not None and declared != len(edges):
        raise ValueError(f"header declares {declared} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def export_graph(g: Graph, format: str) -> str:
    if format == "dre":
        return to_dre(g)
    if format == "dimacs":
        return to_dimacs_graph(g)
    raise ValueError(f"unknown graph format {format!r}")


def import_graph(text: str, format: str) -> Graph:
    if format == "dre":
        return from_dre(text)
    if format == "dimacs":
        return from_dimacs_graph(text)
    raise ValueError(f"unknown graph format {format!r}")


# ---------------------------------------------------------------------------
# Filters (each is a pure predicate of the formula, so evaluation order
# can only change cost, never the accept set).


def phi_is_asymmetric(f: XorFormula, budget: SolveBudget) -> Optional[bool]:
    """None means the search ran out of budget before deciding."""
    report = ir_automorphisms(incidence_graph(f), budget=budget)
    if report.status != "COMPLETE":
        return None
    return report.group_size == 1


def gauss_gap_value(f: XorFormula, budget: SolveBudget):
    return gauss_ratio(f, budget=budget)


def wl1_keeps_pairs_together(f: XorFormula, gadget_mode: str) -> bool:
    """Whether refinement leaves every X^0/X^1 pair in one cell."""
    g = build_graph(f, gadget_mode)
    scheme = VertexScheme(f.n, f.m)
    part = color_refine(g)
    return all(
        part.same_cell(scheme.var_vertex(j, 0), scheme.var_vertex(j, 1))
        for j in range(1, f.n + 1)
    )


def build_graph(f: XorFormula, gadget_mode: str) -> Graph:
    if gadget_mode == GADGET_FULL:
        return build_full(f)
    if gadget_mode == GADGET_CORE:
        return build_core(f)
    raise ValueError(f"unknown gadget mode {gadget_mode!r}")


# ---------------------------------------------------------------------------
# Manifests.


def _fmt_value(value) -> str:
    if value is None:
        return "skipped"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ("inf" if value > 0 else "-inf")
    return str(value)


MANIFEST_FIELDS = (
    "schema_version", "instance_id", "n", "m", "seed", "trial", "gadget_mode",
    "clause_digest", "phi_asymmetric", "uniquely_satisfiable", "gauss_ratio",
    "wl1_nonseparating", "vertices", "edges", "formula_file", "graph_dre",
    "graph_dimacs", "tool_version",
)


def manifest_text(record: InstanceRecord) -> str:
    values = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "instance_id": record.instance_id,
        "n": record.n,
        "m": record.m,
        "seed": record.seed,
        "trial": record.trial,
        "gadget_mode": record.gadget_mode,
        "clause_digest": record.clause_digest,
        "phi_asymmetric": record.phi_asymmetric,
        "uniquely_satisfiable": record.uniquely_satisfiable,
        "gauss_ratio": record.gauss_ratio,
        "wl1_nonseparating": record.wl1_nonseparating,
        "vertices": record.vertices,
        "edges": record.edges,
        "formula_file": record.formula_file if record.formula_file else "absent",
        "graph_dre": record.graph_dre if record.graph_dre else "absent",
        "graph_dimacs": record.graph_dimacs if record.graph_dimacs else "absent",
        "tool_version": record.tool_version,
    }
    return "".join(f"{key}: {_fmt_value(values[key])}\n" for key in MANIFEST_FIELDS)


def parse_manifest(text: str, manifest_file: str = MANIFEST_NAME) -> InstanceRecord:
    fields: Dict[str, str] = {}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        key, _, value = ln.partition(":")
        fields[key.strip()] = value.strip()
    missing = [k for k in MANIFEST_FIELDS if k not in fields]
    if missing:
        raise ValueError(f"manifest missing fields: {missing}")
    if int(fields["schema_version"]) != MANIFEST_SCHEMA_VERSION:
        raise ValueError(f"unsupported manifest schema {fields['schema_version']}")

    def tristate(s: str) -> Optional[bool]:
        return None if s == "skipped" else s == "true"

    def path_or_none(s: str) -> Optional[str]:
        return None if s == "absent" else s

    return InstanceRecord(
        instance_id=fields["instance_id"],
        n=int(fields["n"]),
        m=int(fields["m"]),
        seed=int(fields["seed"]),
        trial=int(fields["trial"]),
        gadget_mode=fields["gadget_mode"],
        clause_digest=fields["clause_digest"],
        phi_asymmetric=tristate(fields["phi_asymmetric"]),
        uniquely_satisfiable=fields["uniquely_satisfiable"] == "true",
        gauss_ratio=float(fields["gauss_ratio"]),
        wl1_nonseparating=tristate(fields["wl1_nonseparating"]),
        vertices=int(fields["vertices"]),
        edges=int(fields["edges"]),
        formula_file=fields["formula_file"],
        graph_dre=path_or_none(fields["graph_dre"]),
        graph_dimacs=path_or_none(fields["graph_dimacs"]),
        manifest_file=manifest_file,
        tool_version=fields["tool_version"],
    )


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def clause_digest(formula_text: str) -> str:
    return "sha256:" + hashlib.sha256(formula_text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# The generator.


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    accepted: bool
    reject_reason: Optional[str]
    record: Optional[InstanceRecord]
    formula: Optional[XorFormula] = None


def run_trial(cfg: PipelineConfig, trial: int) -> TrialOutcome:
    """All filters for one trial; no files are written here."""
    sample_cfg = SampleConfig(n=cfg.n, m=cfg.effective_m, seed=cfg.seed)
    f = sample_homogeneous(sample_cfg, trial)

    phi_asymmetric: Optional[bool] = None
    if cfg.gadget_mode == GADGET_CORE:
        verdict = phi_is_asymmetric(f, cfg.ir_budget)
        if verdict is None:
            return TrialOutcome(trial, False, REJECT_BUDGET, None)
        if not verdict:
            return TrialOutcome(trial, False, REJECT_PHI_SYMMETRIC, None)
        phi_asymmetric = True

    unique = is_uniquely_satisfiable(f)
    if cfg.sat_cross_check:
        verdict = solve(nontrivial_query(f), use_gauss=True, budget=cfg.solver_budget)
        if verdict.result == BUDGET_EXHAUSTED:
            return TrialOutcome(trial, False, REJECT_BUDGET, None)
        if (verdict.result == UNSAT) != unique:
            raise AssertionError("rank check and SAT cross-check disagree")
    if not unique:
        return TrialOutcome(trial, False, REJECT_NOT_UNIQUE, None)

    gap = gauss_gap_value(f, cfg.solver_budget)
    if gap.with_gauss.result == BUDGET_EXHAUSTED:
        return TrialOutcome(trial, False, REJECT_BUDGET, None)
    if not gap.ratio >= cfg.gauss_threshold:
        return TrialOutcome(trial, False, REJECT_LOW_RATIO, None)

    wl1: Optional[bool] = None
    if cfg.wl1_filter:
        wl1 = wl1_keeps_pairs_together(f, cfg.gadget_mode)
        if not wl1:
            return TrialOutcome(trial, False, REJECT_WL1, None)

    g = build_graph(f, cfg.gadget_mode)
    instance_id = f"n{cfg.n:04d}_m{cfg.effective_m:04d}_s{cfg.seed}_t{trial:04d}"
    formula_text = export_xor_dimacs(f)
    record = InstanceRecord(
        instance_id=instance_id,
        n=cfg.n,
        m=cfg.effective_m,
        seed=cfg.seed,
        trial=trial,
        gadget_mode=cfg.gadget_mode,
        clause_digest=clause_digest(formula_text),
        phi_asymmetric=phi_asymmetric,
        uniquely_satisfiable=unique,
        gauss_ratio=gap.ratio,
        wl1_nonseparating=wl1,
        vertices=g.vertex_count,
        edges=g.edge_count,
        formula_file=f"{instance_id}/{FORMULA_NAME}",
        graph_dre=f"{instance_id}/{DRE_NAME}" if "dre" in cfg.formats else None,
        graph_dimacs=f"{instance_id}/{DIMACS_NAME}" if "dimacs" in cfg.formats else None,
        manifest_file=f"{instance_id}/{MANIFEST_NAME}",
        tool_version=__version__,
    )
    return TrialOutcome(trial, True, None, record, f)


def write_instance(record: InstanceRecord, f: XorFormula, g: Graph, out_dir: Union[str, Path]) -> None:
    base = Path(out_dir) / record.instance_id
    base.mkdir(parents=True, exist_ok=True)
    _atomic_write(base / FORMULA_NAME, export_xor_dimacs(f))
    if record.graph_dre is not None:
        _atomic_write(base / DRE_NAME, to_dre(g))
    if record.graph_dimacs is not None:
        _atomic_write(base / DIMACS_NAME, to_dimacs_graph(g))
    _atomic_write(base / MANIFEST_NAME, manifest_text(record))


def generate(cfg: PipelineConfig, out_dir: Union[str, Path]) -> List[InstanceRecord]:
    """Run all trials, write accepted instances and the batch index."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records: List[InstanceRecord] = []
    rejects: List[Tuple[int, str]] = []
    for trial in range(cfg.trials):
        outcome = run_trial(cfg, trial)
        if not outcome.accepted:
            logger.info("trial %d rejected: %s", trial, outcome.reject_reason)
            rejects.append((trial, outcome.reject_reason))
            continue
        record = outcome.record
        g = build_graph(outcome.formula, cfg.gadget_mode)
        write_instance(record, outcome.formula, g, out)
        records.append(record)
        logger.info("trial %d accepted as %s", trial, record.instance_id)
    index_lines = [
        f"# schema_version: {MANIFEST_SCHEMA_VERSION}",
        f"# trials: {cfg.trials} accepted: {len(records)} rejected: {len(rejects)}",
    ]
    index_lines += [f"# rejected trial {t}: {reason}" for t, reason in rejects]
    index_lines += [f"{r.instance_id}\t{r.manifest_file}\t{r.clause_digest}" for r in records]
    _atomic_write(out / "index.txt", "\n".join(index_lines) + "\n")
    return records


# ---------------------------------------------------------------------------
# Validation of written instances.


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    instance_id: str
    checks: Tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def validate(manifest_path: Union[str, Path]) -> ValidationReport:
    """Re-read an instance from disk and re-check the cheap invariants."""
    manifest_path = Path(manifest_path)
    checks: List[CheckResult] = []
    try:
        record = parse_manifest(manifest_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        return ValidationReport("<unreadable>", (CheckResult("manifest_readable", False, str(exc)),))
    checks.append(CheckResult("manifest_readable", True))
    base = manifest_path.parent.parent

    formula_path = base / record.formula_file
    try:
        formula_text = formula_path.read_text(encoding="utf-8")
    except OSError as exc:
        checks.append(CheckResult("formula_file", False, str(exc)))
        return ValidationReport(record.instance_id, tuple(checks))
    checks.append(CheckResult("formula_file", True))

    digest = clause_digest(formula_text)
    checks.append(CheckResult("clause_digest", digest == record.clause_digest,
                              f"expected {record.clause_digest}, got {digest}"))
    try:
        f = import_xor_dimacs(formula_text)
    except ValueError as exc:
        checks.append(CheckResult("formula_parses", False, str(exc)))
        return ValidationReport(record.instance_id, tuple(checks))
    checks.append(CheckResult("formula_parses", True))
    checks.append(CheckResult("formula_shape", f.n == record.n and f.m == record.m,
                              f"n={f.n} m={f.m}"))

    h, _ = to_matrix(f)
    full_rank = rank(h) == f.n
    checks.append(CheckResult("rank_check", full_rank == record.uniquely_satisfiable,
                              f"rank={rank(h)} n={f.n}"))

    expected = build_graph(f, record.gadget_mode)
    if record.gadget_mode == GADGET_FULL:
        want_v = 4 * f.m + 2 * f.n + 3 * (f.n - 1)
        want_e = 12 * f.m + f.n + 6 * (f.n - 1)
    else:
        want_v = 4 * f.m + 2 * f.n
        want_e = 12 * f.m + f.n
    checks.append(CheckResult("vertex_formula", record.vertices == want_v,
                              f"manifest {record.vertices}, formula {want_v}"))
    checks.append(CheckResult("edge_formula", record.edges == want_e,
                              f"manifest {record.edges}, formula {want_e}"))

    for rel, fmt in ((record.graph_dre, "dre"), (record.graph_dimacs, "dimacs")):
        if rel is None:
            continue
        path = base / rel
        try:
            g = import_graph(path.read_text(encoding="utf-8"), fmt)
        except (OSError, ValueError) as exc:
            checks.append(CheckResult(f"graph_{fmt}", False, str(exc)))
            continue
        checks.append(CheckResult(f"graph_{fmt}", True))
        checks.append(CheckResult(f"graph_{fmt}_vertices", g.vertex_count == want_v,
                                  f"file has {g.vertex_count}"))
        checks.append(CheckResult(f"graph_{fmt}_edges", g.edge_count == want_e,
                                  f"file has {g.edge_count}"))
        checks.append(CheckResult(f"graph_{fmt}_matches_formula", g.edges == expected.edges))
        scheme = VertexScheme(f.n, f.m)
        deg = g.degrees()
        clause_ok = all(
            deg[scheme.clause_vertex(c, t)] == 3 for c in range(1, f.m + 1) for t in range(4)
        )
        checks.append(CheckResult(f"graph_{fmt}_clause_degrees", clause_ok))
        if record.gadget_mode == GADGET_FULL:
            stub_ok = all(deg[scheme.gadget_stub(i)] == 1 for i in range(1, f.n))
            checks.append(CheckResult(f"graph_{fmt}_stub_degrees", stub_ok))
    return ValidationReport(record.instance_id, tuple(checks))
