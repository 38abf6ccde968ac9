"""Bench harness: adapters, timeouts, CSV and growth summaries."""

import math
import os
import stat

import pytest

from xorcfi.bench import (
    ADAPTERS,
    MISSING_SOLVER,
    STATUS_ERROR,
    STATUS_OK,
    STATUS_TIMEOUT,
    BenchResult,
    SolverAdapter,
    growth_report,
    results_csv,
    run_external,
    run_internal,
    summarize,
    write_summary,
)
from xorcfi.cfi import Graph
from xorcfi.formula import make_formula
from xorcfi.pipeline import build_graph, to_dre

K4 = Graph.from_edges(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
COMPLETE = make_formula(4, [((1, 2, 3), 0), ((1, 2, 4), 0), ((1, 3, 4), 0), ((2, 3, 4), 0)])


def write_dre(tmp_path, g, name="graph.dre"):
    path = tmp_path / name
    path.write_text(to_dre(g))
    return path


def fake_adapter(tmp_path, name, script, input_format="dre-stdin"):
    binary = tmp_path / f"{name}.sh"
    binary.write_text("#!/bin/sh\n" + script + "\n")
    binary.chmod(binary.stat().st_mode | stat.S_IEXEC)
    adapter = SolverAdapter(name, str(binary), input_format)
    ADAPTERS[name] = adapter
    return adapter


@pytest.fixture
def scratch_adapters():
    added = []
    yield added
    for name in added:
        ADAPTERS.pop(name, None)


def test_missing_binary_degrades(tmp_path):
    dre = write_dre(tmp_path, K4)
    results = []
    for solver in ("traces", "nauty", "bliss", "conauto"):
        res = run_external(solver, dre, timeout=5)
        results.append(res)
        if res.error == MISSING_SOLVER:
            assert res.status == STATUS_ERROR
    # The batch continues regardless of missing binaries.
    assert len(results) == 4


def test_unknown_solver_rejected(tmp_path):
    with pytest.raises(ValueError):
        run_external("zzz", write_dre(tmp_path, K4), timeout=1)


def test_fake_solver_output_parsed(tmp_path, scratch_adapters):
    fake_adapter(tmp_path, "fakegrp", "cat > /dev/null; echo 'grpsize=24; 3 gens'")
    scratch_adapters.append("fakegrp")
    res = run_external("fakegrp", write_dre(tmp_path, K4), timeout=10)
    assert res.status == STATUS_OK
    assert res.group_size == 24


def test_fake_solver_unparseable_is_ok_without_group(tmp_path, scratch_adapters):
    fake_adapter(tmp_path, "fakemute", "cat > /dev/null; echo done")
    scratch_adapters.append("fakemute")
    res = run_external("fakemute", write_dre(tmp_path, K4), timeout=10)
    assert res.status == STATUS_OK
    assert res.group_size is None


def test_timeout_records_limit(tmp_path, scratch_adapters):
    fake_adapter(tmp_path, "fakeslow", "sleep 30")
    scratch_adapters.append("fakeslow")
    res = run_external("fakeslow", write_dre(tmp_path, K4), timeout=0.3)
    assert res.status == STATUS_TIMEOUT
    assert res.time_s == 0.3


def test_failing_solver_reports_error(tmp_path, scratch_adapters):
    fake_adapter(tmp_path, "fakebad", "cat > /dev/null; echo broken >&2; exit 3")
    scratch_adapters.append("fakebad")
    res = run_external("fakebad", write_dre(tmp_path, K4), timeout=10)
    assert res.status == STATUS_ERROR
    assert "exit 3" in res.error


def test_run_internal_k4():
    res = run_internal(K4, instance="k4")
    assert res.status == STATUS_OK
    assert res.group_size == 24
    assert res.nodes is not None


def test_run_internal_lifted_instance():
    g = build_graph(COMPLETE, "full")
    res = run_internal(g, instance="complete")
    assert res.status == STATUS_OK
    assert res.group_size == 1


def test_run_internal_deterministic_nodes():
    g = build_graph(COMPLETE, "full")
    nodes = {run_internal(g).nodes for _ in range(3)}
    assert len(nodes) == 1


def test_run_internal_timeout_records_limit():
    g = build_graph(COMPLETE, "full")
    res = run_internal(g, timeout=9.0, max_nodes=1)
    assert res.status == STATUS_TIMEOUT
    assert res.time_s == 9.0
    assert res.group_size is None


# -- summaries ---------------------------------------------------------------


def test_empty_results_csv_has_header_only():
    csv_text, report = summarize([])
    assert csv_text.splitlines() == ["instance,n_vars,m,vertices,solver,time,status,nodes"]
    assert report == "no data\n"


def res(instance, solver, vertices, nodes=None, time_s=1.0, status=STATUS_OK):
    return BenchResult(instance, solver, "0", time_s, status,
                       nodes=nodes, vertices=vertices, n_vars=1, m=1)


def test_two_points_gives_ratio_not_fit():
    report = growth_report([res("a", "s", 10, nodes=16), res("b", "s", 20, nodes=64)])
    assert "ratio 4.000" in report
    assert "slope" not in report


def test_exponential_series_fits_positive_slope():
    points = [res(f"i{k}", "s", 10 * k, nodes=2**k) for k in range(1, 8)]
    report = growth_report(points)
    slope = float(report.split("slope ")[1].split()[0])
    assert slope > 0
    assert math.isclose(slope, math.log(2) / 10, rel_tol=0.05)


def test_csv_rows_sorted_by_instance_and_solver():
    rows = [res("b", "x", 5, nodes=1), res("a", "y", 5, nodes=1), res("a", "x", 5, nodes=1)]
    lines = results_csv(rows).splitlines()[1:]
    keys = [tuple(ln.split(",")[:1] + ln.split(",")[4:5]) for ln in lines]
    assert keys == sorted(keys)


def test_write_summary_files(tmp_path):
    results = [res("a", "s", 10, nodes=4), res("b", "s", 20, nodes=16)]
    write_summary(results, tmp_path)
    assert (tmp_path / "results.csv").exists()
    assert (tmp_path / "growth.txt").exists()
    dat = (tmp_path / "s.dat").read_text().splitlines()
    assert dat[0] == "# vertices cost"
    assert dat[1].startswith("10 ")
