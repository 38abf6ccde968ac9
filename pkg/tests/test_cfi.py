"""Lifted-graph constructions: counts, gadget wiring, induced symmetry."""

import itertools

import pytest

from xorcfi.cfi import (
    Graph,
    VertexScheme,
    assignment_automorphism,
    build_core,
    build_full,
    incidence_graph,
    is_automorphism,
)
from xorcfi.formula import make_formula, to_matrix
from xorcfi.gf2 import rank
from xorcfi.sampler import SampleConfig, sample_homogeneous

COMPLETE = make_formula(4, [((1, 2, 3), 0), ((1, 2, 4), 0), ((1, 3, 4), 0), ((2, 3, 4), 0)])
SINGLE = make_formula(3, [((1, 2, 3), 0)])


def neighbors(g, v):
    return {b if a == v else a for a, b in g.edges if v in (a, b)}


# -- incidence graph -------------------------------------------------------


def test_incidence_single_clause_is_star():
    g = incidence_graph(SINGLE)
    assert g.vertex_count == 4
    assert neighbors(g, 3) == {0, 1, 2}
    assert g.colors == (0, 0, 0, 1)


def test_incidence_clause_vertices_have_degree_3():
    f = sample_homogeneous(SampleConfig(n=9, m=15, seed=3))
    g = incidence_graph(f)
    deg = g.degrees()
    assert all(deg[f.n + c] == 3 for c in range(f.m))


def test_incidence_complete_triples_variable_degrees():
    g = incidence_graph(COMPLETE)
    deg = g.degrees()
    assert all(deg[j] == 3 for j in range(4))


# -- core lift -------------------------------------------------------------


def test_core_counts_single_clause():
    g = build_core(SINGLE)
    assert g.vertex_count == 2 * 3 + 4 * 1 == 10
    assert g.edge_count == 12 * 1 + 3 == 15


def test_core_gadget_wiring():
    g = build_core(SINGLE)
    s = VertexScheme(3, 1)
    x1, y1, z1 = s.var_vertex(1, 1), s.var_vertex(2, 1), s.var_vertex(3, 1)
    x0, y0 = s.var_vertex(1, 0), s.var_vertex(2, 0)
    assert neighbors(g, s.clause_vertex(1, 0)) == {x1, y1, z1}
    assert neighbors(g, s.clause_vertex(1, 2)) == {x0, y0, z1}


def test_core_rhs1_negates_smallest_variable():
    f = make_formula(3, [((1, 2, 3), 1)])
    g = build_core(f)
    s = VertexScheme(3, 1)
    assert neighbors(g, s.clause_vertex(1, 0)) == {
        s.var_vertex(1, 0), s.var_vertex(2, 1), s.var_vertex(3, 1)
    }


def test_variable_pair_edges_present():
    g = build_core(COMPLETE)
    s = VertexScheme(4, 4)
    for j in range(1, 5):
        assert g.has_edge(s.var_vertex(j, 0), s.var_vertex(j, 1))


# -- full lift -------------------------------------------------------------


def test_full_counts_complete_triples():
    g = build_full(COMPLETE)
    assert g.vertex_count == 33
    assert g.edge_count == 70


def test_full_gadget_edges():
    g = build_full(COMPLETE)
    s = VertexScheme(4, 4)
    for i in range(1, 4):
        il, ir, st_ = s.gadget_left(i), s.gadget_right(i), s.gadget_stub(i)
        assert g.has_edge(il, ir) and g.has_edge(ir, st_)
        assert g.has_edge(il, s.var_vertex(i, 0)) and g.has_edge(il, s.var_vertex(i, 1))
        assert g.has_edge(ir, s.var_vertex(i + 1, 0)) and g.has_edge(ir, s.var_vertex(i + 1, 1))


def test_degree_classification():
    f = sample_homogeneous(SampleConfig(n=10, m=20, seed=5))
    g = build_full(f)
    s = VertexScheme(f.n, f.m)
    deg = g.degrees()
    for c in range(1, f.m + 1):
        for t in range(4):
            assert deg[s.clause_vertex(c, t)] == 3
    for i in range(1, f.n):
        assert deg[s.gadget_stub(i)] == 1
    occ = {j: 0 for j in range(1, f.n + 1)}
    for cl in f.clauses:
        for v in cl.vars:
            occ[v] += 1
    for j, count in occ.items():
        if count >= 2:
            assert deg[s.var_vertex(j, 0)] >= 4
            assert deg[s.var_vertex(j, 1)] >= 4


def test_count_formulas_over_random_configs():
    import random

    rnd = random.Random(99)
    for _ in range(20):
        n = rnd.randint(3, 20)
        m = rnd.randint(1, min(3 * n, (n * (n - 1) * (n - 2)) // 6))
        f = sample_homogeneous(SampleConfig(n=n, m=m, seed=rnd.randint(0, 10**6)))
        full = build_full(f)
        core = build_core(f)
        assert core.vertex_count == 2 * n + 4 * m
        assert core.edge_count == 12 * m + n
        assert full.vertex_count == 4 * m + 2 * n + 3 * (n - 1)
        assert full.edge_count == 12 * m + n + 6 * (n - 1)


def test_core_is_induced_subgraph_of_full():
    f = sample_homogeneous(SampleConfig(n=8, m=12, seed=21))
    core = build_core(f)
    full = build_full(f)
    cutoff = core.vertex_count
    induced = {e for e in full.edges if e[0] < cutoff and e[1] < cutoff}
    assert induced == set(core.edges)


def test_full_requires_two_variables():
    f = make_formula(3, [((1, 2, 3), 0)])
    build_full(f)
    with pytest.raises(ValueError):
        build_full(make_formula(1, []))


# -- assignment-induced automorphisms --------------------------------------


def test_every_satisfying_assignment_gives_automorphism():
    f = make_formula(5, [((1, 2, 3), 0), ((2, 3, 4), 0), ((3, 4, 5), 0)])
    g = build_full(f)
    h, _ = to_matrix(f)
    sols = [
        bits for bits in itertools.product((0, 1), repeat=f.n) if f.satisfied_by(bits)
    ]
    assert len(sols) == 2 ** (f.n - rank(h))
    perms = set()
    for bits in sols:
        perm = assignment_automorphism(f, bits)
        assert is_automorphism(g, perm)
        perms.add(tuple(perm))
    assert len(perms) == len(sols)


def test_zero_assignment_gives_identity():
    perm = assignment_automorphism(COMPLETE, (0, 0, 0, 0))
    assert perm == list(range(33))


def test_unsatisfying_assignment_rejected():
    with pytest.raises(ValueError):
        assignment_automorphism(COMPLETE, (1, 0, 0, 0))


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])
    with pytest.raises(ValueError):
        Graph(3, frozenset({(1, 1)}))
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 1)], colors=[0])
