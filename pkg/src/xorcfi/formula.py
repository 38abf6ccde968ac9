"""3-XOR formulas as GF(2) equation systems, plus CNF export.

A clause is a parity constraint x + y + z = rhs over three distinct
variables; two literal-level clauses that induce the same equation are
the same clause here, so a formula is a set of equations. Clause order
is frozen to lexicographic on (v1, v2, v3, rhs) because downstream
vertex numbering depends on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

from .gf2 import Gf2Matrix, Gf2Vector, kernel_basis, rank


@dataclass(frozen=True, order=True)
class XorClause:
    """Equation v1 + v2 + v3 = rhs with 1-based, strictly increasing vars."""

    vars: Tuple[int, int, int]
    rhs: int

    def __post_init__(self):
        if len(self.vars) != 3:
            raise ValueError(f"clause needs exactly 3 variables, got {self.vars}")
        a, b, c = self.vars
        if not (1 <= a < b < c):
            raise ValueError(f"clause variables must be distinct, sorted, >= 1: {self.vars}")
        if self.rhs not in (0, 1):
            raise ValueError(f"rhs must be 0 or 1, got {self.rhs}")

    @classmethod
    def make(cls, vars: Iterable[int], rhs: int) -> "XorClause":
        vs = tuple(sorted(vars))
        if len(vs) != 3 or len(set(vs)) != 3:
            raise ValueError(f"clause needs 3 distinct variables, got {tuple(vars)}")
        return cls(vs, rhs & 1)

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        """assignment[j] is the value of variable j+1."""
        a, b, c = self.vars
        return (assignment[a - 1] ^ assignment[b - 1] ^ assignment[c - 1]) == self.rhs


@dataclass(frozen=True)
class XorFormula:
    """A set of pairwise-inequivalent 3-XOR clauses over variables 1..n."""

    n: int
    clauses: Tuple[XorClause, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("variable count must be >= 0")
        seen_sets = {}
        for cl in self.clauses:
            if cl.vars[2] > self.n:
                raise ValueError(f"clause {cl.vars} exceeds variable count {self.n}")
            if cl.vars in seen_sets and seen_sets[cl.vars] != cl.rhs:
                raise ValueError(f"contradictory duplicate clauses on variables {cl.vars}")
            seen_sets[cl.vars] = cl.rhs
        if tuple(sorted(self.clauses)) != self.clauses:
            raise ValueError("clauses must be in canonical sorted order")

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def is_homogeneous(self) -> bool:
        return all(cl.rhs == 0 for cl in self.clauses)

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return all(cl.satisfied_by(assignment) for cl in self.clauses)


@dataclass(frozen=True)
class PinnedSystem:
    """A formula plus the unit equation X_var = value.

    Kept as a wrapper rather than a fake width-1 clause; the matrix view
    appends one unit row after the clause rows.
    """

    formula: XorFormula
    var: int
    value: int

    def __post_init__(self):
        if not 1 <= self.var <= self.formula.n:
            raise ValueError(f"pinned variable {self.var} out of range 1..{self.formula.n}")
        if self.value not in (0, 1):
            raise ValueError(f"pinned value must be 0 or 1, got {self.value}")

    @property
    def n(self) -> int:
        return self.formula.n

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return assignment[self.var - 1] == self.value and self.formula.satisfied_by(assignment)


@dataclass(frozen=True)
class CnfFormula:
    """CNF clauses (signed 1-based literals) with optional native XOR rows."""

    n: int
    clauses: Tuple[Tuple[int, ...], ...]
    xors: Tuple[XorClause, ...] = ()

    def __post_init__(self):
        for cl in self.clauses:
            if len(cl) == 0:
                raise ValueError("empty CNF clause at construction")
            for lit in cl:
                if lit == 0 or abs(lit) > self.n:
                    raise ValueError(f"literal {lit} out of range for n={self.n}")
        for xc in self.xors:
            if xc.vars[2] > self.n:
                raise ValueError(f"xor clause {xc.vars} exceeds variable count {self.n}")


def make_formula(n: int, raw: Iterable[Tuple[Iterable[int], int]]) -> XorFormula:
    """Canonicalize raw (triple, rhs) pairs: sort triples, merge duplicates.

    Rejects triples with repeated variables and pairs of clauses that
    share a variable set but disagree on rhs (a contradictory duplicate;
    the samplers never emit these, so this only guards loaded input).
    """
    by_set = {}
    for vars_, rhs in raw:
        cl = XorClause.make(vars_, rhs)
        if cl.vars[2] > n:
            raise ValueError(f"clause {cl.vars} exceeds variable count {n}")
        prev = by_set.get(cl.vars)
        if prev is not None and prev != cl.rhs:
            raise ValueError(f"contradictory duplicate clauses on variables {cl.vars}")
        by_set[cl.vars] = cl.rhs
    clauses = tuple(sorted(XorClause(v, r) for v, r in by_set.items()))
    return XorFormula(n, clauses)


def homogeneous_companion(f: XorFormula) -> XorFormula:
    """Same variable sets, every right-hand side zeroed."""
    clauses = tuple(sorted(XorClause(cl.vars, 0) for cl in f.clauses))
    return XorFormula(f.n, clauses)


def pin(f: XorFormula, i: int, value: int) -> PinnedSystem:
    """f plus the unit equation X_i = value."""
    return PinnedSystem(f, i, value)


def to_matrix(f: Union[XorFormula, PinnedSystem]) -> Tuple[Gf2Matrix, Gf2Vector]:
    """One row per clause in canonical order; column j holds variable j+1.

    For a pinned system the unit row comes last.
    """
    if isinstance(f, PinnedSystem):
        base, rhs = to_matrix(f.formula)
        rows = base.row_bits + (1 << (f.var - 1),)
        b_bits = rhs.bits | (f.value << base.rows)
        return Gf2Matrix(base.rows + 1, base.cols, rows), Gf2Vector(base.rows + 1, b_bits)
    rows = []
    b_bits = 0
    for idx, cl in enumerate(f.clauses):
        bits = 0
        for v in cl.vars:
            bits |= 1 << (v - 1)
        rows.append(bits)
        b_bits |= cl.rhs << idx
    return Gf2Matrix(len(rows), f.n, tuple(rows)), Gf2Vector(len(rows), b_bits)


def is_uniquely_satisfiable(f: XorFormula) -> bool:
    """True iff the all-zero assignment is the only solution (rank = n)."""
    if not f.is_homogeneous:
        raise ValueError("unique-satisfiability check is defined for homogeneous formulas")
    h, _ = to_matrix(f)
    return rank(h) == f.n


def xor_clause_cnf_expansion(vars: Sequence[int], rhs: int) -> List[Tuple[int, ...]]:
    """The 2^(k-1) CNF clauses forbidding the wrong-parity assignments."""
    k = len(vars)
    out = []
    for pattern in range(1 << k):
        if pattern.bit_count() & 1 == rhs:
            continue  # this parity satisfies the xor; no clause forbids it
        # Forbid the assignment where var i is True iff pattern bit i is set.
        out.append(tuple(-v if (pattern >> i) & 1 else v for i, v in enumerate(vars)))
    return out


def nontrivial_solution_formula(f: XorFormula) -> CnfFormula:
    """CNF satisfiable iff the homogeneous f has a solution other than all-zero.

    Each x + y + z = 0 clause expands to its 4 parity clauses, and one
    final clause is the disjunction of all n variables: 4m + 1 clauses.
    """
    if not f.is_homogeneous:
        raise ValueError("nontrivial-solution encoding is defined for homogeneous formulas")
    clauses: List[Tuple[int, ...]] = []
    for cl in f.clauses:
        clauses.extend(xor_clause_cnf_expansion(cl.vars, 0))
    clauses.append(tuple(range(1, f.n + 1)))
    return CnfFormula(f.n, tuple(clauses))


# ---------------------------------------------------------------------------
# DIMACS formats.
#
# CNF:            "p cnf <nvars> <nclauses>" then 0-terminated clause lines.
# XOR extension:  same header counting xor lines; each clause is
#                 "x <lit> <lit> <lit> 0" where an odd number of negated
#                 literals means rhs 1 (we always negate the smallest
#                 variable to encode rhs 1).


def export_dimacs(c: CnfFormula) -> str:
    lines = [f"p cnf {c.n} {len(c.clauses)}"]
    for cl in c.clauses:
        lines.append(" ".join(str(lit) for lit in cl) + " 0")
    return "\n".join(lines) + "\n"


def import_dimacs(text: str) -> CnfFormula:
    n = None
    declared = None
    clauses: List[Tuple[int, ...]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad DIMACS header {line!r}")
            n, declared = int(parts[2]), int(parts[3])
            continue
        if n is None:
            raise ValueError(f"line {lineno}: clause before header")
        lits = [int(tok) for tok in line.split()]
        if not lits or lits[-1] != 0:
            raise ValueError(f"line {lineno}: clause not 0-terminated")
        clauses.append(tuple(lits[:-1]))
    if n is None:
        raise ValueError("missing DIMACS header")
    if declared is not None and declared != len(clauses):
        raise ValueError(f"header declares {declared} clauses, found {len(clauses)}")
    return CnfFormula(n, tuple(clauses))


def export_xor_dimacs(f: XorFormula) -> str:
    lines = [f"p cnf {f.n} {f.m}"]
    for cl in f.clauses:
        a, b, c = cl.vars
        first = -a if cl.rhs else a
        lines.append(f"x {first} {b} {c} 0")
    return "\n".join(lines) + "\n"


def import_xor_dimacs(text: str) -> XorFormula:
    n = None
    declared = None
    raw: List[Tuple[Tuple[int, ...], int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad DIMACS header {line!r}")
            n, declared = int(parts[2]), int(parts[3])
            continue
        if not line.startswith("x"):
            raise ValueError(f"line {lineno}: expected xor clause line, got {line!r}")
        if n is None:
            raise ValueError(f"line {lineno}: clause before header")
        lits = [int(tok) for tok in line.split()[1:]]
        if not lits or lits[-1] != 0:
            raise ValueError(f"line {lineno}: clause not 0-terminated")
        lits = lits[:-1]
        rhs = sum(1 for lit in lits if lit < 0) & 1
        raw.append((tuple(abs(lit) for lit in lits), rhs))
    if n is None:
        raise ValueError("missing DIMACS header")
    if declared is not None and declared != len(raw):
        raise ValueError(f"header declares {declared} clauses, found {len(raw)}")
    return make_formula(n, raw)


def import_extended_dimacs(text: str) -> CnfFormula:
    """Parse a mixed file: plain CNF clause lines plus 'x ...' xor lines."""
    n = None
    cnf: List[Tuple[int, ...]] = []
    xor_raw: List[Tuple[Tuple[int, ...], int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad DIMACS header {line!r}")
            n = int(parts[2])
            continue
        if n is None:
            raise ValueError(f"line {lineno}: clause before header")
        if line.startswith("x"):
            lits = [int(tok) for tok in line.split()[1:]]
            if not lits or lits[-1] != 0:
                raise ValueError(f"line {lineno}: clause not 0-terminated")
            lits = lits[:-1]
            rhs = sum(1 for lit in lits if lit < 0) & 1
            xor_raw.append((tuple(abs(lit) for lit in lits), rhs))
        else:
            lits = [int(tok) for tok in line.split()]
            if not lits or lits[-1] != 0:
                raise ValueError(f"line {lineno}: clause not 0-terminated")
            cnf.append(tuple(lits[:-1]))
    if n is None:
        raise ValueError("missing DIMACS header")
    xors = tuple(sorted(XorClause.make(vs, rhs) for vs, rhs in xor_raw))
    return CnfFormula(n, tuple(cnf), xors)


def solution_space(f: XorFormula) -> Tuple[int, List[Gf2Vector]]:
    """(rank, kernel basis) of the homogeneous part's coefficient matrix."""
    h, _ = to_matrix(f)
    return rank(h), kernel_basis(h)
