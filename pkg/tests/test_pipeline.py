"""Pipeline: file formats, filters, determinism, validation."""

import random
import subprocess

import pytest

from xorcfi.cfi import Graph
from xorcfi.formula import import_xor_dimacs
from xorcfi.pipeline import (
    GADGET_CORE,
    GADGET_FULL,
    InstanceRecord,
    PipelineConfig,
    build_graph,
    export_graph,
    from_dimacs_graph,
    from_dre,
    generate,
    import_graph,
    manifest_text,
    parse_manifest,
    phi_is_asymmetric,
    run_trial,
    to_dimacs_graph,
    to_dre,
    validate,
    wl1_keeps_pairs_together,
)
from xorcfi.formula import is_uniquely_satisfiable
from xorcfi.sampler import SampleConfig, sample_homogeneous
from xorcfi.xorsat import SolveBudget, gauss_ratio

P3 = Graph.from_edges(3, [(0, 1), (1, 2)])


def random_graph(rnd, n, p=0.4):
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)
                                if rnd.random() < p])


# -- graph formats ---------------------------------------------------------


def test_dre_frozen_path_graph():
    assert to_dre(P3) == "n=3 $=0 g\n0 : 1;\n1 : 2.\n"


def test_dre_frozen_empty_graph():
    assert to_dre(Graph.from_edges(2, [])) == "n=2 $=0 g\n.\n"


def test_dimacs_frozen_path_graph():
    assert to_dimacs_graph(P3) == "p edge 3 2\ne 1 2\ne 2 3\n"


def test_round_trip_100_graphs_byte_exact():
    rnd = random.Random(8)
    for _ in range(100):
        g = random_graph(rnd, rnd.randint(1, 15))
        for fmt in ("dre", "dimacs"):
            text = export_graph(g, fmt)
            back = import_graph(text, fmt)
            assert back.vertex_count == g.vertex_count
            assert back.edges == g.edges
            assert export_graph(back, fmt) == text


def test_dre_parses_isolated_tail_vertices():
    g = Graph.from_edges(5, [(0, 1)])
    assert from_dre(to_dre(g)).vertex_count == 5


def test_dimacs_graph_rejects_garbage():
    with pytest.raises(ValueError):
        from_dimacs_graph("p edge 2 1\nq 1 2\n")
    with pytest.raises(ValueError):
        from_dre("0 : 1;\n")


@pytest.mark.skipif(__import__("shutil").which("dreadnaut") is None,
                    reason="dreadnaut binary not installed")
def test_dre_accepted_by_real_dreadnaut():
    text = to_dre(P3) + "x\nq\n"
    proc = subprocess.run(["dreadnaut"], input=text, capture_output=True, text=True, timeout=30)
    assert proc.returncode == 0


# -- config ----------------------------------------------------------------


def test_config_rejects_subcritical_ratio():
    with pytest.raises(ValueError):
        PipelineConfig(n=10, ratio=0.9, seed=0)


def test_config_accepts_ratio_one():
    cfg = PipelineConfig(n=4, m=4, seed=0)
    assert cfg.effective_m == 4


def test_config_requires_bounded_budgets():
    with pytest.raises(ValueError):
        PipelineConfig(n=6, m=8, solver_budget=SolveBudget())


# -- filters ---------------------------------------------------------------


def test_forced_complete_triples_accepted():
    cfg = PipelineConfig(n=4, m=4, seed=1, trials=1, gauss_threshold=1.0)
    outcome = run_trial(cfg, 0)
    assert outcome.accepted
    assert outcome.record.vertices == 33
    assert outcome.record.edges == 70
    assert outcome.record.uniquely_satisfiable


def test_filter_order_cannot_change_accept_set():
    budget = SolveBudget(max_decisions=100_000)
    threshold = 2.0
    for trial in range(12):
        f = sample_homogeneous(SampleConfig(n=8, m=12, seed=55), trial)
        checks = {
            "phi": lambda f=f: phi_is_asymmetric(f, budget) is True,
            "unique": lambda f=f: is_uniquely_satisfiable(f),
            "gauss": lambda f=f: gauss_ratio(f, budget).ratio >= threshold,
            "wl1": lambda f=f: wl1_keeps_pairs_together(f, GADGET_CORE),
        }
        orderings = [("phi", "unique", "gauss", "wl1"),
                     ("wl1", "gauss", "unique", "phi"),
                     ("unique", "wl1", "phi", "gauss")]
        verdicts = []
        for order in orderings:
            verdicts.append(all(checks[name]() for name in order))
        assert len(set(verdicts)) == 1


def test_accepted_records_satisfy_invariants(tmp_path):
    cfg = PipelineConfig(n=10, m=18, seed=13, trials=8, gauss_threshold=1.0)
    records = generate(cfg, tmp_path)
    assert records, "expected at least one accepted trial"
    for rec in records:
        f = import_xor_dimacs((tmp_path / rec.formula_file).read_text())
        assert is_uniquely_satisfiable(f)
        assert rec.vertices == 4 * rec.m + 2 * rec.n + 3 * (rec.n - 1)
        assert rec.edges == 12 * rec.m + rec.n + 6 * (rec.n - 1)
        assert rec.gauss_ratio >= cfg.gauss_threshold
        g = build_graph(f, GADGET_FULL)
        deg = g.degrees()
        assert min(deg[2 * j] for j in range(rec.n)) >= 4


def test_core_mode_requires_asymmetric_incidence(tmp_path):
    cfg = PipelineConfig(n=9, m=11, seed=77, trials=10, gadget_mode=GADGET_CORE,
                         gauss_threshold=1.0)
    records = generate(cfg, tmp_path)
    for rec in records:
        assert rec.phi_asymmetric is True
        f = import_xor_dimacs((tmp_path / rec.formula_file).read_text())
        budget = SolveBudget(max_decisions=100_000)
        assert phi_is_asymmetric(f, budget) is True
        assert rec.vertices == 4 * rec.m + 2 * rec.n


# -- determinism and artifacts ----------------------------------------------


def test_generate_is_byte_deterministic(tmp_path):
    cfg = PipelineConfig(n=10, m=15, seed=3, trials=4, gauss_threshold=1.0,
                         formats=("dre", "dimacs"))
    a, b = tmp_path / "a", tmp_path / "b"
    recs_a = generate(cfg, a)
    recs_b = generate(cfg, b)
    assert [r.instance_id for r in recs_a] == [r.instance_id for r in recs_b]
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_manifest_round_trip():
    record = InstanceRecord(
        instance_id="n0010_m0015_s3_t0000", n=10, m=15, seed=3, trial=0,
        gadget_mode="full", clause_digest="sha256:abc", phi_asymmetric=None,
        uniquely_satisfiable=True, gauss_ratio=float("inf"), wl1_nonseparating=None,
        vertices=107, edges=244, formula_file="n0010_m0015_s3_t0000/formula.xcnf",
        graph_dre="n0010_m0015_s3_t0000/graph.dre", graph_dimacs=None,
        manifest_file="n0010_m0015_s3_t0000/manifest.txt", tool_version="0.1.0",
    )
    assert parse_manifest(manifest_text(record), record.manifest_file) == record


def test_validate_fresh_instance(tmp_path):
    cfg = PipelineConfig(n=8, m=12, seed=5, trials=3, gauss_threshold=1.0,
                         formats=("dre", "dimacs"))
    records = generate(cfg, tmp_path)
    assert records
    report = validate(tmp_path / records[0].manifest_file)
    assert report.ok, [c for c in report.checks if not c.passed]


def test_validate_catches_deleted_edge(tmp_path):
    cfg = PipelineConfig(n=8, m=12, seed=5, trials=3, gauss_threshold=1.0)
    records = generate(cfg, tmp_path)
    dre_path = tmp_path / records[0].graph_dre
    g = from_dre(dre_path.read_text())
    edges = sorted(g.edges)[:-1]
    dre_path.write_text(to_dre(Graph.from_edges(g.vertex_count, edges)))
    report = validate(tmp_path / records[0].manifest_file)
    failed = {c.name for c in report.checks if not c.passed}
    assert "graph_dre_edges" in failed


def test_validate_catches_flipped_rhs(tmp_path):
    cfg = PipelineConfig(n=8, m=12, seed=5, trials=3, gauss_threshold=1.0)
    records = generate(cfg, tmp_path)
    fpath = tmp_path / records[0].formula_file
    text = fpath.read_text().splitlines()
    first_clause = text[1].split()
    first_clause[1] = str(-int(first_clause[1]))
    text[1] = " ".join(first_clause)
    fpath.write_text("\n".join(text) + "\n")
    report = validate(tmp_path / records[0].manifest_file)
    failed = {c.name for c in report.checks if not c.passed}
    assert "clause_digest" in failed


def test_validate_missing_file(tmp_path):
    cfg = PipelineConfig(n=8, m=12, seed=5, trials=3, gauss_threshold=1.0)
    records = generate(cfg, tmp_path)
    (tmp_path / records[0].formula_file).unlink()
    report = validate(tmp_path / records[0].manifest_file)
    assert not report.ok


def test_index_lists_accepted_instances(tmp_path):
    cfg = PipelineConfig(n=9, m=14, seed=6, trials=5, gauss_threshold=1.0)
    records = generate(cfg, tmp_path)
    index = (tmp_path / "index.txt").read_text().splitlines()
    listed = [ln.split("\t")[0] for ln in index if ln and not ln.startswith("#")]
    assert listed == [r.instance_id for r in records]


# -- CLI -------------------------------------------------------------------


def test_cli_generate_and_check(tmp_path):
    from xorcfi.cli import main

    out = tmp_path / "batch"
    rc = main(["generate", "--n", "8", "--m", "12", "--seed", "2", "--count", "3",
               "--gauss-threshold", "1", "--out", str(out)])
    assert rc == 0
    manifests = sorted(str(p) for p in out.glob("*/manifest.txt"))
    assert manifests
    assert main(["check"] + manifests) == 0


def test_cli_sample_then_build(tmp_path):
    from xorcfi.cli import main

    sample_dir = tmp_path / "formulas"
    assert main(["sample", "--n", "6", "--m", "8", "--seed", "4", "--count", "2",
                 "--out", str(sample_dir)]) == 0
    formulas = sorted(str(p) for p in sample_dir.glob("*.xcnf"))
    assert len(formulas) == 2
    build_dir = tmp_path / "graphs"
    assert main(["build", *formulas, "--gadget", "core", "--format", "dimacs",
                 "--out", str(build_dir)]) == 0
    built = list(build_dir.glob("*.dimacs"))
    assert len(built) == 2
    g = from_dimacs_graph(built[0].read_text())
    assert g.vertex_count == 2 * 6 + 4 * 8
