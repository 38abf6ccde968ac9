"""Dense linear algebra over GF(2) with bit-packed rows.

A matrix row is a single Python int: bit j holds the entry in column j,
so a row XOR is one arbitrary-precision xor. All reductions are plain
Gauss-Jordan with the pivot taken as the first row carrying the leading
bit; free variables are set to 0, so solve() and kernel_basis() return
canonical (reduced-echelon-derived) results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple


@dataclass(frozen=True)
class Gf2Vector:
    """A length-n bit vector packed into one int (bit j = coordinate j)."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vector length must be >= 0")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError("padding bits beyond length must be zero")

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.n:
            raise IndexError(j)
        return (self.bits >> j) & 1

    def to_tuple(self) -> Tuple[int, ...]:
        return tuple((self.bits >> j) & 1 for j in range(self.n))

    @classmethod
    def from_bits(cls, entries: Iterable[int]) -> "Gf2Vector":
        bits = 0
        n = 0
        for e in entries:
            if e & 1:
                bits |= 1 << n
            n += 1
        return cls(n, bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def is_zero(self) -> bool:
        return self.bits == 0


@dataclass(frozen=True)
class Gf2Matrix:
    """rows x cols matrix over GF(2); row_bits[i] packs row i."""

    rows: int
    cols: int
    row_bits: Tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be >= 0")
        if len(self.row_bits) != self.rows:
            raise ValueError("row_bits length must equal rows")
        for r in self.row_bits:
            if r < 0 or r >> self.cols:
                raise ValueError("padding bits beyond cols must be zero")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], cols: Optional[int] = None) -> "Gf2Matrix":
        packed = []
        width = 0
        for row in rows:
            bits = 0
            k = 0
            for e in row:
                if e & 1:
                    bits |= 1 << k
                k += 1
            width = max(width, k)
            packed.append(bits)
        if cols is None:
            cols = width
        return cls(len(packed), cols, tuple(packed))

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    def entry(self, i: int, j: int) -> int:
        return (self.row_bits[i] >> j) & 1


def _rref(row_bits: Iterable[int], cols: int) -> Tuple[List[int], List[int]]:
    """Reduced row echelon form; returns (reduced rows, pivot columns)."""
    work = list(row_bits)
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, len(work)):
            if (work[i] >> c) & 1:
                pivot = i
                break
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        for i in range(len(work)):
            if i != r and ((work[i] >> c) & 1):
                work[i] ^= work[r]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return work, pivots


def rank(m: Gf2Matrix) -> int:
    """Rank of m over GF(2); m itself is never mutated."""
    _, pivots = _rref(m.row_bits, m.cols)
    return len(pivots)


def kernel_basis(m: Gf2Matrix) -> List[Gf2Vector]:
    """Canonical basis of the null space {x : m x = 0}.

    One basis vector per free column, in ascending free-column order;
    the free coordinate is set to 1 and pivot coordinates are read off
    the reduced echelon form.
    """
    work, pivots = _rref(m.row_bits, m.cols)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        bits = 1 << free
        for idx, pc in enumerate(pivots):
            if (work[idx] >> free) & 1:
                bits |= 1 << pc
        basis.append(Gf2Vector(m.cols, bits))
    return basis


def solve(m: Gf2Matrix, b: Gf2Vector) -> Optional[Gf2Vector]:
    """Some x with m x = b, or None if inconsistent.

    The returned x is canonical: all free variables are 0.
    """
    if b.n != m.rows:
        raise ValueError(f"dimension mismatch: matrix has {m.rows} rows, vector length {b.n}")
    # Augment each row with its right-hand side in bit position `cols`.
    aug = [m.row_bits[i] | (((b.bits >> i) & 1) << m.cols) for i in range(m.rows)]
    work, pivots = _rref(aug, m.cols)
    col_mask = (1 << m.cols) - 1
    for row in work:
        if (row & col_mask) == 0 and (row >> m.cols) & 1:
            return None
    bits = 0
    for idx, pc in enumerate(pivots):
        if (work[idx] >> m.cols) & 1:
            bits |= 1 << pc
    return Gf2Vector(m.cols, bits)


def reduced_system(m: Gf2Matrix, b: Gf2Vector) -> Optional[List[Tuple[int, int]]]:
    """RREF of the augmented system [m | b] as (row_bits, rhs) pairs.

    Returns None when the system is inconsistent; zero rows are dropped,
    so a full-rank system reduces to unit rows.
    """
    if b.n != m.rows:
        raise ValueError(f"dimension mismatch: matrix has {m.rows} rows, vector length {b.n}")
    aug = [m.row_bits[i] | (((b.bits >> i) & 1) << m.cols) for i in range(m.rows)]
    work, pivots = _rref(aug, m.cols)
    col_mask = (1 << m.cols) - 1
    out = []
    for row in work:
        coeffs = row & col_mask
        rhs = (row >> m.cols) & 1
        if coeffs == 0:
            if rhs:
                return None
            continue
        out.append((coeffs, rhs))
    return out


def mat_vec(m: Gf2Matrix, v: Gf2Vector) -> Gf2Vector:
    """Matrix-vector product over GF(2)."""
    if v.n != m.cols:
        raise ValueError(f"dimension mismatch: matrix has {m.cols} cols, vector length {v.n}")
    bits = 0
    for i, row in enumerate(m.row_bits):
        if (row & v.bits).bit_count() & 1:
            bits |= 1 << i
    return Gf2Vector(m.rows, bits)
