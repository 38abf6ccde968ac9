"""Refinement and symmetry machinery.

Color refinement runs vectorized: each round sorts every vertex's
neighbor colors and splits cells via a lexicographic unique over
(own color, sorted neighbor colors). Cell ids produced this way depend
only on the refinement history, never on vertex numbering, which is
what the individualization-refinement search needs to match up cells
across branches.

The IR automorphism search follows the classic scheme: the leftmost
root-to-leaf path fixes a reference labeling, every other leaf proposes
the permutation onto it, verified automorphisms prune target cells by
orbits, and subtrees off the leftmost path unwind as soon as they
produce one automorphism. There is deliberately no node-invariant
pruning and no component factoring: wrong branches pay for their whole
subtree, so the node count directly reflects how long refinement keeps
branches looking alike.
"""

from __future__ import annotations

import itertools
import math
import sys
import time
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .cfi import Graph, is_automorphism
from .formula import PinnedSystem, XorFormula
from .xorsat import SolveBudget

CELL_FIRST_SMALLEST = "first-smallest"
CELL_FIRST_LARGEST = "first-largest"

STATUS_COMPLETE = "COMPLETE"
STATUS_TIMEOUT = "TIMEOUT"


class BudgetExceededError(RuntimeError):
    """Raised when an exact computation refuses to start or continue."""


@dataclass(frozen=True)
class Partition:
    """Ordered partition of 0..element_count-1; cell ids are dense and
    assigned in order of each cell's minimum element."""

    cell_of: Tuple[int, ...]

    def __post_init__(self):
        seen: Dict[int, int] = {}
        for x, c in enumerate(self.cell_of):
            if c not in seen:
                if c != len(seen):
                    raise ValueError("cell ids must appear in order of minimum element")
                seen[c] = x
        if seen and set(seen) != set(range(len(seen))):
            raise ValueError("cell ids must be dense from 0")

    @classmethod
    def from_labels(cls, labels: Iterable) -> "Partition":
        order: Dict = {}
        out = []
        for lab in labels:
            if lab not in order:
                order[lab] = len(order)
            out.append(order[lab])
        return cls(tuple(out))

    @classmethod
    def unit(cls, element_count: int) -> "Partition":
        return cls(tuple(0 for _ in range(element_count)))

    @property
    def element_count(self) -> int:
        return len(self.cell_of)

    @property
    def num_cells(self) -> int:
        return max(self.cell_of) + 1 if self.cell_of else 0

    def cells(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.num_cells)]
        for x, c in enumerate(self.cell_of):
            out[c].append(x)
        return out

    def same_cell(self, u: int, v: int) -> bool:
        return self.cell_of[u] == self.cell_of[v]

    def is_discrete(self) -> bool:
        return self.num_cells == self.element_count

    def refines(self, other: "Partition") -> bool:
        cell_target: Dict[int, int] = {}
        for x in range(self.element_count):
            c = self.cell_of[x]
            if c in cell_target:
                if cell_target[c] != other.cell_of[x]:
                    return False
            else:
                cell_target[c] = other.cell_of[x]
        return True


@dataclass
class AutReport:
    generators: List[Tuple[int, ...]]
    group_size: int
    orbit_partition: Partition
    search_nodes: int
    status: str


# ---------------------------------------------------------------------------
# Vectorized refinement core.


class _Csr:
    def __init__(self, g: Graph):
        self.v = g.vertex_count
        deg = np.zeros(self.v, dtype=np.int64)
        for u, w in g.edges:
            deg[u] += 1
            deg[w] += 1
        self.indptr = np.zeros(self.v + 1, dtype=np.int64)
        np.cumsum(deg, out=self.indptr[1:])
        self.nbrs = np.zeros(len(g.edges) * 2, dtype=np.int64)
        fill = self.indptr[:-1].copy()
        for u, w in g.edges:
            self.nbrs[fill[u]] = w
            fill[u] += 1
            self.nbrs[fill[w]] = u
            fill[w] += 1
        self.row_of = np.repeat(np.arange(self.v, dtype=np.int64), deg)
        self.pos = np.arange(len(self.nbrs), dtype=np.int64) - self.indptr[self.row_of]
        self.max_deg = int(deg.max()) if self.v else 0


def _refine(colors: np.ndarray, csr: _Csr) -> np.ndarray:
    """Coarsest stable refinement; returns dense ids in invariant order."""
    v = csr.v
    if v == 0:
        return colors
    _, inv = np.unique(colors, return_inverse=True)
    colors = inv.reshape(-1).astype(np.int64)
    ncolors = int(colors.max()) + 1
    width = csr.max_deg + 1
    mat = np.empty((v, width), dtype=np.int64)
    while ncolors < v:
        ncol = colors[csr.nbrs]
        order = np.lexsort((ncol, csr.row_of))
        mat.fill(-1)
        mat[:, 0] = colors
        mat[csr.row_of, csr.pos + 1] = ncol[order]
        _, inv = np.unique(mat, axis=0, return_inverse=True)
        inv = inv.reshape(-1).astype(np.int64)
        new_n = int(inv.max()) + 1
        if new_n == ncolors:
            return inv
        colors = inv
        ncolors = new_n
    return colors


def _initial_colors(g: Graph, initial: Optional[Partition]) -> np.ndarray:
    if initial is not None:
        if initial.element_count != g.vertex_count:
            raise ValueError("initial partition does not cover the vertex set")
        return np.asarray(initial.cell_of, dtype=np.int64)
    if g.colors is not None:
        return np.asarray(g.colors, dtype=np.int64)
    return np.zeros(g.vertex_count, dtype=np.int64)


def color_refine(g: Graph, initial: Optional[Partition] = None) -> Partition:
    """Coarsest stable refinement of the initial partition (1-WL).

    Vertices stay together only when they agree, cell by cell, on their
    neighbor counts. The result is unique, so the output is independent
    of any processing order.
    """
    colors = _refine(_initial_colors(g, initial), _Csr(g))
    return Partition.from_labels(colors.tolist())


def individualize(g: Graph, p: Partition, v: int) -> Partition:
    """Move v to its own cell, then re-refine."""
    if not 0 <= v < g.vertex_count:
        raise ValueError(f"vertex {v} out of range")
    colors = np.asarray(p.cell_of, dtype=np.int64) * 2 + 1
    colors[v] -= 1
    return Partition.from_labels(_refine(colors, _Csr(g)).tolist())


# ---------------------------------------------------------------------------
# Individualization-refinement automorphism search.


class _SearchBudget:
    def __init__(self, budget: Optional[SolveBudget]):
        self.max_nodes = None if budget is None else budget.max_decisions
        self.deadline = None
        if budget is not None and budget.max_seconds is not None:
            self.deadline = time.monotonic() + budget.max_seconds
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise _BudgetHit
        if self.deadline is not None and (self.nodes & 0x3F) == 0 and time.monotonic() > self.deadline:
            raise _BudgetHit


class _BudgetHit(Exception):
    pass


def _orbit_closure(seed: Set[int], gens: List[Tuple[int, ...]], prefix: List[int]) -> Set[int]:
    fixers = [p for p in gens if all(p[x] == x for x in prefix)]
    if not fixers:
        return set(seed)
    seen = set(seed)
    frontier = list(seed)
    while frontier:
        x = frontier.pop()
        for p in fixers:
            y = p[x]
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def _orbits_from_generators(n: int, gens: List[Tuple[int, ...]]) -> Partition:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in gens:
        for x in range(n):
            rx, ry = find(x), find(p[x])
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
    return Partition.from_labels([find(x) for x in range(n)])


def _group_order(n: int, gens: List[Tuple[int, ...]]) -> int:
    if not gens:
        return 1
    from sympy.combinatorics import Permutation, PermutationGroup

    return int(PermutationGroup([Permutation(list(p)) for p in gens]).order())


def _target_cell(colors: np.ndarray, strategy: str) -> np.ndarray:
    sizes = np.bincount(colors)
    nonsingle = np.where(sizes > 1)[0]
    if strategy == CELL_FIRST_SMALLEST:
        best = nonsingle[np.argmin(sizes[nonsingle])]
    elif strategy == CELL_FIRST_LARGEST:
        best = nonsingle[np.argmax(sizes[nonsingle])]
    else:
        raise ValueError(f"unknown cell strategy {strategy!r}")
    return np.where(colors == best)[0]


def ir_automorphisms(
    g: Graph,
    budget: Optional[SolveBudget] = None,
    cell_strategy: str = CELL_FIRST_SMALLEST,
) -> AutReport:
    """Automorphism generators, exact group size and orbits via IR search.

    search_nodes counts backtrack-tree nodes and is the hardness
    statistic; it is deterministic for a fixed input and strategy.
    budget.max_decisions, when set, bounds the node count; on exhaustion
    the report is flagged TIMEOUT and carries whatever was found.
    """
    v = g.vertex_count
    if v == 0:
        return AutReport([], 1, Partition(()), 0, STATUS_COMPLETE)
    csr = _Csr(g)
    root = _refine(_initial_colors(g, None), csr)
    tracker = _SearchBudget(budget)
    gens: List[Tuple[int, ...]] = []
    gen_set: Set[Tuple[int, ...]] = set()
    first_leaf: List[Optional[np.ndarray]] = [None]

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 3 * v + 200))

    def leaf(colors: np.ndarray) -> bool:
        order = np.argsort(colors)
        if first_leaf[0] is None:
            first_leaf[0] = order.copy()
            return False
        perm = np.empty(v, dtype=np.int64)
        perm[first_leaf[0]] = order
        cand = tuple(int(x) for x in perm)
        if all(cand[i] == i for i in range(v)) or cand in gen_set:
            return False
        if is_automorphism(g, cand):
            gens.append(cand)
            gen_set.add(cand)
            return True
        return False

    def node(colors: np.ndarray, depth: int, prefix: List[int], is_left: bool) -> bool:
        tracker.tick()
        if int(colors.max()) + 1 == v:
            return leaf(colors)
        members = [int(x) for x in _target_cell(colors, cell_strategy)]
        covered: Set[int] = set()
        found = False
        first_child = True
        for w in members:
            if w in covered:
                continue
            child_colors = colors * 2 + 1
            child_colors[w] -= 1
            child_colors = _refine(child_colors, csr)
            got = node(child_colors, depth + 1, prefix + [w], is_left and first_child)
            first_child = False
            found = found or got
            if not is_left and found:
                return True
            covered = _orbit_closure(covered | {w}, gens, prefix)
        return found

    status = STATUS_COMPLETE
    try:
        node(root, 0, [], True)
    except _BudgetHit:
        status = STATUS_TIMEOUT
    # On TIMEOUT this is the order of the group found so far, a lower bound.
    order = _group_order(v, gens)
    return AutReport(gens, order, _orbits_from_generators(v, gens), tracker.nodes, status)


def brute_force_automorphisms(g: Graph) -> AutReport:
    """Exact automorphism group by checking every vertex permutation."""
    v = g.vertex_count
    if v > 10:
        raise ValueError("brute force is guarded to graphs with at most 10 vertices")
    auts = []
    for perm in itertools.permutations(range(v)):
        if is_automorphism(g, perm):
            auts.append(perm)
    gens = [p for p in auts if any(p[i] != i for i in range(v))]
    return AutReport(gens, len(auts), _orbits_from_generators(v, gens),
                     math.factorial(v), STATUS_COMPLETE)


# ---------------------------------------------------------------------------
# k-dimensional Weisfeiler-Leman over V^k tuples.


def _flat_index(tup: Sequence[int], v: int) -> int:
    out = 0
    for x in tup:
        out = out * v + x
    return out


def wl_k(g: Graph, k: int, max_tuples: int = 300_000) -> Partition:
    """Stable k-tuple partition under the substitution-count condition.

    Tuples start on their ordered-induced-subgraph type (equalities,
    adjacencies, vertex colors); a round recolors each tuple by the
    multiset, over all vertices x, of the k-vector of colors obtained by
    substituting x at each position. Elements of the result are tuples
    in lexicographic order (flat index sum(u_i * V^(k-1-i))).
    """
    if k < 2:
        raise ValueError("wl_k is defined for k >= 2")
    v = g.vertex_count
    total = v**k
    if total > max_tuples:
        raise BudgetExceededError(f"{total} tuples exceed the budget of {max_tuples}")
    if v == 0:
        return Partition(())

    adj = np.zeros((v, v), dtype=np.int8)
    for a, b in g.edges:
        adj[a, b] = 1
        adj[b, a] = 1
    vcol = np.zeros(v, dtype=np.int64) if g.colors is None else np.asarray(g.colors, dtype=np.int64)

    comps = np.indices((v,) * k).reshape(k, -1)
    features = []
    for i in range(k):
        for j in range(i + 1, k):
            features.append((comps[i] == comps[j]).astype(np.int64))
            features.append(adj[comps[i], comps[j]].astype(np.int64))
    for i in range(k):
        features.append(vcol[comps[i]])
    _, colors = np.unique(np.stack(features, axis=1), axis=0, return_inverse=True)
    colors = colors.reshape(-1).astype(np.int64)

    # Substituting x at position i moves a flat index by (x - u_i) * v^(k-1-i).
    vpow = np.array([v ** (k - 1 - i) for i in range(k)], dtype=np.int64)
    base = [np.arange(total, dtype=np.int64) - comps[i] * vpow[i] for i in range(k)]

    ncolors = int(colors.max()) + 1
    sig = np.empty((total, v), dtype=np.int64)
    while True:
        if ncolors**k > 2**62:
            raise BudgetExceededError("tuple-color signature would overflow packing")
        sig.fill(0)
        for i in range(k):
            scale = ncolors ** (k - 1 - i)
            for x in range(v):
                sig[:, x] += colors[base[i] + x * vpow[i]] * scale
        sig.sort(axis=1)
        _, inv = np.unique(np.concatenate([colors[:, None], sig], axis=1),
                           axis=0, return_inverse=True)
        inv = inv.reshape(-1).astype(np.int64)
        new_n = int(inv.max()) + 1
        if new_n == ncolors:
            break
        colors = inv
        ncolors = new_n
    return Partition.from_labels(colors.tolist())


def wl_indistinguishable(g: Graph, u: int, v: int, k: int, max_tuples: int = 300_000) -> bool:
    """True when the constant tuples (u,...,u) and (v,...,v) share a cell.

    k = 1 is the refinement level: plain color refinement must leave u
    and v together.
    """
    if u == v:
        return True
    if k == 1:
        return color_refine(g).same_cell(u, v)
    part = wl_k(g, k, max_tuples=max_tuples)
    n = g.vertex_count
    return part.same_cell(_flat_index([u] * k, n), _flat_index([v] * k, n))


# ---------------------------------------------------------------------------
# Exact k-local consistency of a formula (existential pebble game).


def _estimated_states(n: int, k: int) -> int:
    return sum(math.comb(n, j) * (1 << j) for j in range(min(k, n) + 1))


def local_consistency(
    f: Union[XorFormula, PinnedSystem],
    k: int,
    max_states: int = 2_000_000,
) -> bool:
    """Whether the assignment game on f admits endless consistent play.

    Computes the greatest family of consistent partial assignments on at
    most k variables that is closed under restriction and extension (any
    assignment below size k extends to any requested variable inside the
    family); nonempty exactly when the empty assignment survives.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(f, PinnedSystem):
        n = f.n
        constraints = [(sum(1 << (x - 1) for x in cl.vars), cl.rhs) for cl in f.formula.clauses]
        constraints.append((1 << (f.var - 1), f.value))
    else:
        n = f.n
        constraints = [(sum(1 << (x - 1) for x in cl.vars), cl.rhs) for cl in f.clauses]
    keff = min(k, n)
    est = _estimated_states(n, keff)
    if est > max_states:
        raise BudgetExceededError(f"about {est} game states exceed the budget of {max_states}")

    alive: Set[Tuple[int, int]] = set()
    for size in range(keff + 1):
        for combo in itertools.combinations(range(n), size):
            vmask = 0
            for x in combo:
                vmask |= 1 << x
            inside = [(cm, r) for cm, r in constraints if cm & ~vmask == 0]
            for bits in range(1 << size):
                amask = 0
                for pos, x in enumerate(combo):
                    if (bits >> pos) & 1:
                        amask |= 1 << x
                if all((amask & cm).bit_count() & 1 == r for cm, r in inside):
                    alive.add((vmask, amask))

    dead: List[Tuple[int, int]] = []

    def kill(state: Tuple[int, int]) -> None:
        if state in alive:
            alive.discard(state)
            dead.append(state)

    # Seed: states below size k missing both extensions at some variable.
    for vmask, amask in list(alive):
        if vmask.bit_count() >= keff:
            continue
        for x in range(n):
            bit = 1 << x
            if vmask & bit:
                continue
            if (vmask | bit, amask) not in alive and (vmask | bit, amask | bit) not in alive:
                kill((vmask, amask))
                break

    while dead:
        vmask, amask = dead.pop()
        for x in range(n):
            bit = 1 << x
            if vmask & bit:
                # Parent loses this extension; dies if the sibling is gone too.
                parent = (vmask & ~bit, amask & ~bit)
                if parent in alive and (vmask, amask ^ bit) not in alive:
                    kill(parent)
            else:
                # Supersets of a dead state die (closure under restriction).
                kill((vmask | bit, amask))
                kill((vmask | bit, amask | bit))
    return (0, 0) in alive
