"""DPLL solver against a vectorized truth-table oracle."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xorcfi.formula import CnfFormula, XorClause, import_extended_dimacs, make_formula
from xorcfi.xorsat import (
    BUDGET_EXHAUSTED,
    SAT,
    UNSAT,
    SolveBudget,
    gauss_ratio,
    nontrivial_query,
    solve,
)


# -- oracle ----------------------------------------------------------------


def brute_verdict(cnf: CnfFormula) -> bool:
    """Satisfiability by evaluating every assignment, vectorized."""
    count = 1 << cnf.n
    assignments = np.arange(count, dtype=np.int64)
    ok = np.ones(count, dtype=bool)
    for clause in cnf.clauses:
        sat = np.zeros(count, dtype=bool)
        for lit in clause:
            bit = ((assignments >> (abs(lit) - 1)) & 1).astype(bool)
            sat |= bit if lit > 0 else ~bit
        ok &= sat
    for xc in cnf.xors:
        parity = np.zeros(count, dtype=np.int64)
        for v in xc.vars:
            parity ^= (assignments >> (v - 1)) & 1
        ok &= parity == xc.rhs
    return bool(ok.any())


def check_model(cnf: CnfFormula, model) -> bool:
    for clause in cnf.clauses:
        if not any((model[abs(l) - 1] == 1) == (l > 0) for l in clause):
            return False
    return all(xc.satisfied_by(model) for xc in cnf.xors)


def random_inputs(rnd, n_max=16):
    n = rnd.randint(1, n_max)
    clauses = []
    for _ in range(rnd.randint(0, 2 * n)):
        width = rnd.randint(1, min(3, n))
        vs = rnd.sample(range(1, n + 1), width)
        clauses.append(tuple(v if rnd.random() < 0.5 else -v for v in vs))
    xors = []
    if n >= 3:
        seen = set()
        for _ in range(rnd.randint(0, 2 * n)):
            vs = tuple(sorted(rnd.sample(range(1, n + 1), 3)))
            if vs in seen:
                continue
            seen.add(vs)
            xors.append(XorClause(vs, rnd.randint(0, 1)))
    return CnfFormula(n, tuple(clauses), tuple(sorted(xors)))


COMPLETE = make_formula(4, [((1, 2, 3), 0), ((1, 2, 4), 0), ((1, 3, 4), 0), ((2, 3, 4), 0)])
TWO_CLAUSE = make_formula(4, [((1, 2, 3), 0), ((1, 2, 4), 0)])


# -- frozen examples -------------------------------------------------------


def test_unique_system_query_unsat_both_modes():
    query = nontrivial_query(COMPLETE)
    assert not brute_verdict(query)
    for use_gauss in (False, True):
        stats = solve(query, use_gauss=use_gauss)
        assert stats.result == UNSAT


def test_degenerate_system_query_sat_with_nonzero_model():
    query = nontrivial_query(TWO_CLAUSE)
    assert brute_verdict(query)
    for use_gauss in (False, True):
        stats = solve(query, use_gauss=use_gauss)
        assert stats.result == SAT
        assert any(stats.model)
        assert check_model(query, stats.model)


def test_empty_cnf_sat_zero_decisions():
    stats = solve(CnfFormula(3, ()))
    assert stats.result == SAT and stats.decisions == 0


def test_verdict_agrees_with_brute_force_on_200_inputs():
    import random

    rnd = random.Random(424242)
    for i in range(200):
        cnf = random_inputs(rnd, n_max=16 if i % 4 == 0 else 10)
        expected = brute_verdict(cnf)
        plain = solve(cnf, use_gauss=False)
        gauss = solve(cnf, use_gauss=True)
        assert plain.result == (SAT if expected else UNSAT), cnf
        assert gauss.result == plain.result, cnf
        if expected:
            assert check_model(cnf, plain.model)
            assert check_model(cnf, gauss.model)


def test_budget_only_resolves_never_flips():
    import random

    rnd = random.Random(7)
    for _ in range(40):
        cnf = random_inputs(rnd, n_max=8)
        unlimited = solve(cnf)
        small = solve(cnf, budget=SolveBudget(max_decisions=1))
        assert small.result in (unlimited.result, BUDGET_EXHAUSTED)
        assert solve(cnf, budget=SolveBudget(max_decisions=10**9)).result == unlimited.result


def test_budget_exhaustion_reported():
    f = make_formula(12, [(t, 0) for t in _triples_12()])
    stats = solve(nontrivial_query(f), use_gauss=False, budget=SolveBudget(max_decisions=1))
    assert stats.result == BUDGET_EXHAUSTED


def _triples_12():
    # Deterministic mid-density triple set on 12 variables.
    out = []
    for i in range(1, 11):
        out.append((i, i + 1, i + 2))
        out.append((i, i + 1, 12 if i + 3 > 12 else i + 3))
    return sorted(set(tuple(sorted(t)) for t in out))


def test_decisions_deterministic():
    query = nontrivial_query(COMPLETE)
    runs = [solve(query, use_gauss=False).decisions for _ in range(3)]
    assert len(set(runs)) == 1


def test_gauss_mode_presolves_full_rank_instantly():
    stats = solve(nontrivial_query(COMPLETE), use_gauss=True)
    assert stats.result == UNSAT and stats.decisions == 0


# -- gauss gap -------------------------------------------------------------


def test_gauss_ratio_deterministic_and_finite():
    gap1 = gauss_ratio(COMPLETE)
    gap2 = gauss_ratio(COMPLETE)
    assert gap1.ratio == gap2.ratio
    assert gap1.with_gauss.decisions == 0
    assert gap1.ratio == gap1.without_gauss.decisions / 1


def test_gauss_ratio_infinite_on_plain_side_exhaustion():
    f = make_formula(12, [(t, 0) for t in _triples_12()])
    gap = gauss_ratio(f, budget=SolveBudget(max_decisions=1))
    assert gap.without_gauss.result == BUDGET_EXHAUSTED
    assert gap.ratio == float("inf")


def test_gauss_ratio_rejects_nonhomogeneous():
    with pytest.raises(ValueError):
        gauss_ratio(make_formula(3, [((1, 2, 3), 1)]))


def test_nontrivial_query_shape():
    q = nontrivial_query(TWO_CLAUSE)
    assert q.clauses == ((1, 2, 3, 4),)
    assert q.xors == TWO_CLAUSE.clauses


# -- format intake ---------------------------------------------------------


def test_reads_extended_dimacs():
    text = "p cnf 4 3\n1 2 3 4 0\nx 1 2 3 0\nx -1 2 4 0\n"
    cnf = import_extended_dimacs(text)
    assert cnf.clauses == ((1, 2, 3, 4),)
    assert cnf.xors == (XorClause((1, 2, 3), 0), XorClause((1, 2, 4), 1))
    assert solve(cnf).result == (SAT if brute_verdict(cnf) else UNSAT)


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_tautologies_and_duplicates_handled(rnd):
    n = rnd.randint(2, 6)
    clauses = [(1, -1, 2), (2, 2, -1), (min(n, 2),)]
    cnf = CnfFormula(n, tuple(tuple(c) for c in clauses))
    stats = solve(cnf)
    assert (stats.result == SAT) == brute_verdict(cnf)
