"""Graph constructions that lift a 3-XOR system into a GI-hard graph.

Three graphs per formula:
  * the bipartite incidence graph (clauses left, variables right),
  * the core lift: 2 vertices per variable, 4 per clause,
  * the full lift: core plus a 3-vertex order gadget between each pair
    of consecutive variables, which pins the variable order and kills
    all automorphisms except those induced by satisfying assignments.

Vertex numbering is frozen (see VertexScheme) so exports are
byte-identical across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .formula import XorFormula

# Tag order for the 4 vertices of a clause gadget. Tag bits say which of
# the clause's variables (in ascending order) are negated relative to
# the clause's base literal pattern.
CLAUSE_TAGS: Tuple[Tuple[int, int, int], ...] = ((0, 0, 0), (0, 1, 1), (1, 1, 0), (1, 0, 1))
CLAUSE_TAG_NAMES = ("000", "011", "110", "101")


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 0..vertex_count-1."""

    vertex_count: int
    edges: FrozenSet[Tuple[int, int]]
    colors: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < v < self.vertex_count):
                raise ValueError(f"bad edge ({u}, {v}) for {self.vertex_count} vertices")
        if self.colors is not None and len(self.colors) != self.vertex_count:
            raise ValueError("colors must cover every vertex")

    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        edges: Iterable[Tuple[int, int]],
        colors: Optional[Sequence[int]] = None,
    ) -> "Graph":
        norm = frozenset((min(u, v), max(u, v)) for u, v in edges)
        return cls(vertex_count, norm, None if colors is None else tuple(colors))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self) -> List[List[int]]:
        adj: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj:
            lst.sort()
        return adj

    def degrees(self) -> List[int]:
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges


@dataclass(frozen=True)
class VertexScheme:
    """Frozen vertex ids for the lifted graphs of an (n, m) formula.

    variable j (1-based): X_j^0 -> 2(j-1), X_j^1 -> 2(j-1)+1
    clause c (1-based, canonical clause order), tag t in CLAUSE_TAGS:
        2n + 4(c-1) + tag_index
    order gadget i in 1..n-1: i_l -> 2n+4m+3(i-1), i_r -> +1, i_s -> +2
    """

    n: int
    m: int

    def var_vertex(self, j: int, bit: int) -> int:
        return 2 * (j - 1) + bit

    def clause_vertex(self, c: int, tag_index: int) -> int:
        return 2 * self.n + 4 * (c - 1) + tag_index

    def gadget_left(self, i: int) -> int:
        return 2 * self.n + 4 * self.m + 3 * (i - 1)

    def gadget_right(self, i: int) -> int:
        return self.gadget_left(i) + 1

    def gadget_stub(self, i: int) -> int:
        return self.gadget_left(i) + 2

    @property
    def core_vertex_count(self) -> int:
        return 2 * self.n + 4 * self.m

    @property
    def full_vertex_count(self) -> int:
        return 4 * self.m + 2 * self.n + 3 * (self.n - 1)

    def describe(self, v: int) -> str:
        """Human-readable name of a vertex id, for reports and debugging."""
        if v < 2 * self.n:
            return f"X{v // 2 + 1}^{v % 2}"
        if v < self.core_vertex_count:
            off = v - 2 * self.n
            return f"C{off // 4 + 1}_{CLAUSE_TAG_NAMES[off % 4]}"
        off = v - self.core_vertex_count
        kind = ("l", "r", "s")[off % 3]
        return f"{off // 3 + 1}_{kind}"


def incidence_graph(f: XorFormula) -> Graph:
    """Bipartite clause/variable incidence graph, colored by side.

    Variable j is vertex j-1 (color 0); clause c is vertex n+c-1 (color 1).
    """
    if not f.is_homogeneous:
        raise ValueError("incidence graph is defined for homogeneous formulas")
    n = f.n
    edges = set()
    for c, cl in enumerate(f.clauses, start=1):
        for v in cl.vars:
            edges.add((v - 1, n + c - 1))
    colors = tuple([0] * n + [1] * f.m)
    g = Graph.from_edges(n + f.m, edges, colors)
    deg = g.degrees()
    assert all(deg[n + c - 1] == 3 for c in range(1, f.m + 1))
    return g


def _clause_literal_patterns(rhs: int) -> List[Tuple[int, int, int]]:
    """Negation pattern of each of the 4 gadget vertices of a clause.

    Bit k is 1 when the clause's k-th variable (ascending order) appears
    negated at that vertex. The base vertex carries the clause itself;
    for rhs 1 the smallest variable is the negated one.
    """
    base = (1, 0, 0) if rhs else (0, 0, 0)
    return [tuple(b ^ t for b, t in zip(base, tag)) for tag in CLAUSE_TAGS]


def build_core(f: XorFormula) -> Graph:
    """The lift without order gadgets: 2n + 4m vertices, 12m + n edges.

    Each clause becomes 4 vertices (the clause and the 3 equivalent
    clauses from negating exactly two literals). A clause vertex is
    adjacent to X^1 where it holds the positive literal and to X^0 where
    it holds the negated one; every X^0-X^1 pair is joined by an edge.
    """
    scheme = VertexScheme(f.n, f.m)
    edges = set()
    for j in range(1, f.n + 1):
        edges.add((scheme.var_vertex(j, 0), scheme.var_vertex(j, 1)))
    for c, cl in enumerate(f.clauses, start=1):
        for tag_index, pattern in enumerate(_clause_literal_patterns(cl.rhs)):
            cv = scheme.clause_vertex(c, tag_index)
            for k, var in enumerate(cl.vars):
                edges.add(tuple(sorted((cv, scheme.var_vertex(var, 1 - pattern[k])))))
    g = Graph.from_edges(scheme.core_vertex_count, edges)
    assert g.vertex_count == 2 * f.n + 4 * f.m
    assert g.edge_count == 12 * f.m + f.n
    return g


def build_full(f: XorFormula) -> Graph:
    """Core lift plus order gadgets: 4m + 2n + 3(n-1) vertices.

    Gadget i contributes vertices i_l, i_r, i_s and the six edges
    (i_l,i_r), (i_r,i_s), (i_l,X_i^0), (i_l,X_i^1), (i_r,X_{i+1}^0),
    (i_r,X_{i+1}^1), for a total of 12m + n + 6(n-1) edges.
    """
    if f.n < 2:
        raise ValueError("order gadgets need at least 2 variables")
    scheme = VertexScheme(f.n, f.m)
    core = build_core(f)
    edges = set(core.edges)
    for i in range(1, f.n):
        il, ir, s = scheme.gadget_left(i), scheme.gadget_right(i), scheme.gadget_stub(i)
        edges.add((il, ir))
        edges.add((ir, s))
        edges.add((scheme.var_vertex(i, 0), il))
        edges.add((scheme.var_vertex(i, 1), il))
        edges.add(tuple(sorted((ir, scheme.var_vertex(i + 1, 0)))))
        edges.add(tuple(sorted((ir, scheme.var_vertex(i + 1, 1)))))
    g = Graph.from_edges(scheme.full_vertex_count, edges)
    assert g.vertex_count == 4 * f.m + 2 * f.n + 3 * (f.n - 1)
    assert g.edge_count == 12 * f.m + f.n + 6 * (f.n - 1)
    return g


def assignment_automorphism(f: XorFormula, assignment: Sequence[int]) -> List[int]:
    """The vertex permutation of build_full(f) induced by a satisfying assignment.

    Swaps X^0 and X^1 exactly where the assignment is 1, permutes each
    clause gadget by the corresponding two-variable swap, and fixes the
    order gadgets. Only defined when the assignment satisfies f.
    """
    if not f.is_homogeneous:
        raise ValueError("assignment-induced automorphisms exist for homogeneous formulas only")
    if not f.satisfied_by(assignment):
        raise ValueError("assignment does not satisfy the formula")
    scheme = VertexScheme(f.n, f.m)
    perm = list(range(scheme.full_vertex_count))
    for j in range(1, f.n + 1):
        if assignment[j - 1]:
            perm[scheme.var_vertex(j, 0)] = scheme.var_vertex(j, 1)
            perm[scheme.var_vertex(j, 1)] = scheme.var_vertex(j, 0)
    tag_of = {tag: idx for idx, tag in enumerate(CLAUSE_TAGS)}
    for c, cl in enumerate(f.clauses, start=1):
        # A satisfied clause has an even number of swapped variables, so
        # xoring tags with the swap mask permutes the gadget's 4 tags.
        swap = tuple(assignment[v - 1] for v in cl.vars)
        for tag_index, tag in enumerate(CLAUSE_TAGS):
            new_tag = tuple(t ^ s for t, s in zip(tag, swap))
            perm[scheme.clause_vertex(c, tag_index)] = scheme.clause_vertex(c, tag_of[new_tag])
    return perm


def is_automorphism(g: Graph, perm: Sequence[int]) -> bool:
    """Edge- and color-preserving check, done edge by edge."""
    if sorted(perm) != list(range(g.vertex_count)):
        return False
    if g.colors is not None and any(g.colors[perm[v]] != g.colors[v] for v in range(g.vertex_count)):
        return False
    for u, v in g.edges:
        pu, pv = perm[u], perm[v]
        if (min(pu, pv), max(pu, pv)) not in g.edges:
            return False
    return True
