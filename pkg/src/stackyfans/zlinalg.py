"""Exact linear algebra over the integers.

Matrices are immutable tuples of tuples of Python ints, so every value is
hashable and can be cached or compared structurally.  The Smith normal form
routine pins its pivot choice (smallest magnitude first, lowest (row, col)
on ties, row-major) so canonical forms built on top of it are reproducible.

The invariant-factor description of a finitely generated abelian group lives
here too, next to the normal form that produces it; ``fgab`` re-exports it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

Vec = tuple[int, ...]


@dataclass(frozen=True)
class IntMatrix:
    """Immutable rows x cols integer matrix, entries stored row-major."""

    rows: int
    cols: int
    entries: tuple[Vec, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix dimension")
        if len(self.entries) != self.rows:
            raise ValueError("entry rows do not match declared row count")
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged matrix")
            for x in row:
                if not isinstance(x, int) or isinstance(x, bool):
                    raise ValueError("entries must be plain ints")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return IntMatrix(len(data), cols, data)

    @staticmethod
    def from_columns(cols: Sequence[Sequence[int]], rows: Optional[int] = None) -> "IntMatrix":
        data = [tuple(int(x) for x in c) for c in cols]
        if rows is None:
            rows = len(data[0]) if data else 0
        entries = tuple(tuple(c[i] for c in data) for i in range(rows))
        return IntMatrix(rows, len(data), entries)

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        return IntMatrix(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @staticmethod
    def zero(rows: int, cols: int) -> "IntMatrix":
        return IntMatrix(rows, cols, tuple(tuple(0 for _ in range(cols)) for _ in range(rows)))

    def row(self, i: int) -> Vec:
        return self.entries[i]

    def column(self, j: int) -> Vec:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[Vec]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(self.column(j) for j in range(self.cols)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        ocols = other.columns()
        entries = tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in ocols)
            for row in self.entries
        )
        return IntMatrix(self.rows, other.cols, entries)

    def apply(self, v: Sequence[int]) -> Vec:
        """Matrix times column vector."""
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return IntMatrix(self.rows, self.cols + other.cols,
                         tuple(a + b for a, b in zip(self.entries, other.entries)))

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch in vstack")
        return IntMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "IntMatrix":
        entries = tuple(tuple(self.entries[i][j] for j in col_idx) for i in row_idx)
        return IntMatrix(len(row_idx), len(col_idx), entries)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)


@dataclass(frozen=True)
class SnfDecomposition:
    """U @ M @ V == S with U, V unimodular and S in Smith normal form."""

    S: IntMatrix
    U: IntMatrix
    V: IntMatrix
    invariant_factors: tuple[int, ...]


def _smallest_pivot(s: list[list[int]], t: int, rows: int, cols: int) -> Optional[tuple[int, int]]:
    best = None
    best_mag = None
    for i in range(t, rows):
        for j in range(t, cols):
            x = s[i][j]
            if x != 0:
                mag = abs(x)
                if best_mag is None or mag < best_mag:
                    best, best_mag = (i, j), mag
    return best


def snf(m: IntMatrix) -> SnfDecomposition:
    """Smith normal form with transforms.

    Pivot selection is deterministic: among the nonzero entries of the
    working block, the one of smallest absolute value wins, ties broken by
    lowest (row, col) scanning row-major.  Diagonal entries come out
    nonnegative and each divides the next.
    """
    rows, cols = m.rows, m.cols
    s = [list(r) for r in m.entries]
    u = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def row_op(i: int, k: int, q: int) -> None:
        # row i -= q * row k
        s[i] = [a - q * b for a, b in zip(s[i], s[k])]
        u[i] = [a - q * b for a, b in zip(u[i], u[k])]

    def col_op(j: int, k: int, q: int) -> None:
        # col j -= q * col k
        for r in s:
            r[j] -= q * r[k]
        for r in v:
            r[j] -= q * r[k]

    def swap_rows(i: int, k: int) -> None:
        s[i], s[k] = s[k], s[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j: int, k: int) -> None:
        for r in s:
            r[j], r[k] = r[k], r[j]
        for r in v:
            r[j], r[k] = r[k], r[j]

    t = 0
    limit = min(rows, cols)
    while t < limit:
        pivot = _smallest_pivot(s, t, rows, cols)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)
        while True:
            for i in range(t + 1, rows):
                while s[i][t] != 0:
                    row_op(i, t, s[i][t] // s[t][t])
                    if s[i][t] != 0:
                        # remainder became the smaller pivot
                        swap_rows(i, t)
            for j in range(t + 1, cols):
                while s[t][j] != 0:
                    col_op(j, t, s[t][j] // s[t][t])
                    if s[t][j] != 0:
                        swap_cols(j, t)
            if any(s[i][t] for i in range(t + 1, rows)):
                continue
            if any(s[t][j] for j in range(t + 1, cols)):
                continue
            bad = None
            p = s[t][t]
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if s[i][j] % p != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            # fold the offending row in so the next pass shrinks the pivot
            row_op(t, bad, -1)
        if s[t][t] < 0:
            s[t] = [-a for a in s[t]]
            u[t] = [-a for a in u[t]]
        t += 1

    factors = tuple(s[i][i] for i in range(limit) if s[i][i] != 0)
    return SnfDecomposition(
        S=IntMatrix.from_rows(s, cols),
        U=IntMatrix.from_rows(u, rows),
        V=IntMatrix.from_rows(v, cols),
        invariant_factors=factors,
    )


def rank(m: IntMatrix) -> int:
    return len(snf(m).invariant_factors)


def determinant(m: IntMatrix) -> int:
    """Determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant of non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = [list(r) for r in m.entries]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def unimodular_inverse(m: IntMatrix) -> IntMatrix:
    """Inverse of a matrix with determinant +-1."""
    d = snf(m)
    if m.rows != m.cols or len(d.invariant_factors) != m.rows or any(
            f != 1 for f in d.invariant_factors):
        raise ValueError("matrix is not unimodular")
    return d.V @ d.U


def kernel_basis(m: IntMatrix) -> IntMatrix:
    """Basis of the integer kernel {v : M v = 0}, as columns.

    The span is saturated automatically (kernels of integer maps are).
    """
    d = snf(m)
    r = len(d.invariant_factors)
    cols = [d.V.column(j) for j in range(r, m.cols)]
    return IntMatrix.from_columns(cols, rows=m.cols)


def solve_integer(m: IntMatrix, b: Sequence[int]) -> Optional[Vec]:
    """One integer solution of M x = b, or None."""
    if len(b) != m.rows:
        raise ValueError("rhs length mismatch")
    d = snf(m)
    c = d.U.apply(b)
    r = len(d.invariant_factors)
    y = []
    for i in range(m.cols):
        if i < r:
            f = d.invariant_factors[i]
            if c[i] % f != 0:
                return None
            y.append(c[i] // f)
        else:
            y.append(0)
    for i in range(r, m.rows):
        if c[i] != 0:
            return None
    return d.V.apply(y)


def column_space_basis(m: IntMatrix) -> IntMatrix:
    """Basis (as columns) of the lattice generated by the columns of M."""
    d = snf(m)
    r = len(d.invariant_factors)
    uinv = unimodular_inverse(d.U)
    cols = [tuple(x * d.invariant_factors[i] for x in uinv.column(i)) for i in range(r)]
    return IntMatrix.from_columns(cols, rows=m.rows)


def saturate(m: IntMatrix) -> IntMatrix:
    """Basis (as columns) of the saturation (colspan QM) ∩ Z^rows."""
    d = snf(m)
    r = len(d.invariant_factors)
    uinv = unimodular_inverse(d.U)
    return IntMatrix.from_columns([uinv.column(i) for i in range(r)], rows=m.rows)


def saturation_index(m: IntMatrix) -> int:
    """Index of colspan(M) inside its saturation."""
    out = 1
    for f in snf(m).invariant_factors:
        out *= f
    return out


@dataclass(frozen=True)
class FgAbGroup:
    """Finitely generated abelian group in invariant-factor form.

    ``Z^free_rank + Z/d_1 + ... + Z/d_t`` with each d_i >= 2 and
    d_1 | d_2 | ... | d_t.  The constructor insists on that shape; use
    :func:`normalized_group` to build one from arbitrary torsion numbers.
    """

    free_rank: int
    torsion: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.free_rank, int) or self.free_rank < 0:
            raise ValueError("free_rank must be a nonnegative int")
        for d in self.torsion:
            if not isinstance(d, int) or d < 2:
                raise ValueError("torsion invariants must be ints >= 2")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a != 0:
                raise ValueError("torsion invariants must form a divisibility chain")

    @property
    def ngens(self) -> int:
        return self.free_rank + len(self.torsion)

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def is_finite(self) -> bool:
        return self.free_rank == 0

    def relations(self) -> IntMatrix:
        """Columns generating the relations: d_j on the j-th torsion slot."""
        f, t = self.free_rank, len(self.torsion)
        cols = []
        for j, d in enumerate(self.torsion):
            col = [0] * (f + t)
            col[f + j] = d
            cols.append(col)
        return IntMatrix.from_columns(cols, rows=f + t)

    def reduce(self, v: Sequence[int]) -> Vec:
        """Canonical representative: torsion coordinates into [0, d)."""
        if len(v) != self.ngens:
            raise ValueError("vector length does not match generator count")
        f = self.free_rank
        out = list(int(x) for x in v)
        for j, d in enumerate(self.torsion):
            out[f + j] %= d
        return tuple(out)


def normalized_group(free_rank: int, torsion_numbers: Sequence[int]) -> FgAbGroup:
    """Invariant-factor form of Z^free_rank + sum Z/n for arbitrary n >= 1."""
    ns = [int(n) for n in torsion_numbers]
    if any(n < 1 for n in ns):
        raise ValueError("torsion orders must be positive")
    ns = [n for n in ns if n > 1]
    if not ns:
        return FgAbGroup(free_rank, ())
    diag = IntMatrix.from_rows(
        [[ns[i] if i == j else 0 for j in range(len(ns))] for i in range(len(ns))])
    factors = snf(diag).invariant_factors
    return FgAbGroup(free_rank, tuple(f for f in factors if f > 1))


def cokernel_presentation(m: IntMatrix) -> tuple[FgAbGroup, IntMatrix]:
    """Cokernel Z^rows / colspan(M) together with a presenting projection.

    The projection matrix has one row per generator of the cokernel (free
    generators first, then torsion), mapping a vector of Z^rows to its
    coordinates in the quotient.  Torsion rows are reduced modulo their
    invariant factor.
    """
    d = snf(m)
    r = len(d.invariant_factors)
    free_rows = [d.U.row(i) for i in range(r, m.rows)]
    torsion = []
    torsion_rows = []
    for i in range(r):
        f = d.invariant_factors[i]
        if f >= 2:
            torsion.append(f)
            torsion_rows.append(tuple(x % f for x in d.U.row(i)))
    group = FgAbGroup(len(free_rows), tuple(torsion))
    proj = IntMatrix.from_rows(free_rows + torsion_rows, cols=m.rows)
    return group, proj


def hermite_row_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form H = T @ M with T unimodular.

    Pivots are positive, entries above a pivot lie in [0, pivot), zero rows
    sink to the bottom.  H is the unique such echelon form of the row
    lattice, which is what makes it usable as a canonical form.
    """
    rows, cols = m.rows, m.cols
    h = [list(r) for r in m.entries]
    t = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    r = 0
    for c in range(cols):
        pivot_row = None
        for i in range(r, rows):
            if h[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            h[r], h[pivot_row] = h[pivot_row], h[r]
            t[r], t[pivot_row] = t[pivot_row], t[r]
        for i in range(r + 1, rows):
            while h[i][c] != 0:
                if abs(h[i][c]) < abs(h[r][c]):
                    h[r], h[i] = h[i], h[r]
                    t[r], t[i] = t[i], t[r]
                q = h[i][c] // h[r][c]
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                t[i] = [x - q * y for x, y in zip(t[i], t[r])]
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            t[r] = [-x for x in t[r]]
        for i in range(r):
            q = h[i][c] // h[r][c]
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                t[i] = [x - q * y for x, y in zip(t[i], t[r])]
        r += 1
        if r == rows:
            break
    return IntMatrix.from_rows(h, cols), IntMatrix.from_rows(t, rows)


def reduce_mod_row_lattice(v: Sequence[int], m: IntMatrix) -> Vec:
    """Canonical representative of v modulo the row lattice of M."""
    h, _ = hermite_row_form(m)
    out = list(int(x) for x in v)
    for row in h.entries:
        c = next((j for j, x in enumerate(row) if x != 0), None)
        if c is None:
            break
        q = out[c] // row[c]
        if q:
            out = [x - q * y for x, y in zip(out, row)]
    return tuple(out)
