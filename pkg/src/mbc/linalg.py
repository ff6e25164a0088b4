"""Exact dense linear algebra over the rationals.

Everything here is small (a handful of rows and columns) but must be exact:
rank decisions, unique-solution tests and kernels feed equality-sensitive
combinatorics, so no floating point appears anywhere.  Elimination clears
denominators first and then runs fraction-free integer row reduction with
per-row gcd normalization to keep intermediate entries small.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

UNIQUE = "unique"
NO_SOLUTION = "no_solution"
NON_UNIQUE = "non_unique"


@dataclass(frozen=True)
class RatMatrix:
    """Row-major exact matrix; entries are Fractions (ints accepted on input)."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise ValueError("matrix dimensions must be positive")
        width = len(self.rows[0])
        if any(len(r) != width for r in self.rows):
            raise ValueError("ragged rows")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.rows[0])

    @classmethod
    def from_rows(cls, rows) -> "RatMatrix":
        return cls(tuple(tuple(Fraction(x) for x in row) for row in rows))

    @classmethod
    def from_columns(cls, columns) -> "RatMatrix":
        cols = [tuple(Fraction(x) for x in col) for col in columns]
        return cls(tuple(zip(*cols)))

    @classmethod
    def from_collection(cls, masks, n: int) -> "RatMatrix":
        """The n-by-k 0/1 matrix whose columns are the characteristic vectors
        of the given coalitions, in collection order."""
        return cls.from_columns(
            [[1 if mask >> i & 1 else 0 for i in range(n)] for mask in masks]
        )

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.rows)

    def transpose(self) -> "RatMatrix":
        return RatMatrix(tuple(zip(*self.rows)))

    def mul_vector(self, vec) -> tuple[Fraction, ...]:
        return tuple(sum(a * x for a, x in zip(row, vec)) for row in self.rows)


def _as_rows(matrix) -> list[list[Fraction]]:
    rows = matrix.rows if isinstance(matrix, RatMatrix) else matrix
    return [[Fraction(x) for x in row] for row in rows]


def _int_rows(matrix) -> list[list[int]]:
    """Clear denominators row by row (rank and kernels are unaffected)."""
    out = []
    for row in _as_rows(matrix):
        scale = 1
        for x in row:
            scale = scale * x.denominator // gcd(scale, x.denominator)
        out.append([int(x * scale) for x in row])
    return out


def _reduce_row(row: list[int]) -> None:
    g = 0
    for x in row:
        g = gcd(g, x)
        if g == 1:
            return
    if g > 1:
        for i, x in enumerate(row):
            row[i] = x // g


def _echelon(rows: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """In-place integer row echelon form; returns (rows, pivot column list)."""
    if not rows:
        return rows, []
    n_cols = len(rows[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        pivot_row = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, len(rows)):
            x = rows[i][c]
            if x:
                row_i = rows[i]
                row_r = rows[r]
                for j in range(c, n_cols):
                    row_i[j] = row_i[j] * piv - row_r[j] * x
                _reduce_row(row_i)
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(matrix) -> int:
    rows = _int_rows(matrix)
    _, pivots = _echelon(rows)
    return len(pivots)


def solve_unique(matrix, b) -> tuple[str, tuple[Fraction, ...] | None]:
    """Solve A x = b demanding uniqueness.

    Returns (UNIQUE, x) iff rank(A) = #cols = rank([A b]); (NO_SOLUTION, None)
    when the system is inconsistent; (NON_UNIQUE, None) when solutions form an
    affine family.
    """
    rows = _as_rows(matrix)
    b = [Fraction(x) for x in b]
    if len(b) != len(rows):
        raise ValueError("right-hand side has wrong length")
    n_cols = len(rows[0]) if rows else 0
    aug = _int_rows([row + [bx] for row, bx in zip(rows, b)])
    aug, pivots = _echelon(aug)
    if n_cols in pivots:
        return NO_SOLUTION, None
    if len(pivots) < n_cols:
        return NON_UNIQUE, None
    # back substitution on the echelon form (pivot columns are 0..n_cols-1)
    x: list[Fraction] = [Fraction(0)] * n_cols
    for r in range(n_cols - 1, -1, -1):
        row = aug[r]
        acc = Fraction(row[n_cols])
        for j in range(r + 1, n_cols):
            acc -= row[j] * x[j]
        x[r] = acc / row[r]
    return UNIQUE, tuple(x)


def null_space(matrix) -> list[tuple[Fraction, ...]]:
    """Basis of {x : A x = 0} (the right kernel, vectors indexed by columns)."""
    rows = _int_rows(matrix)
    if not rows:
        return []
    n_cols = len(rows[0])
    rows, pivots = _echelon(rows)
    free_cols = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for free in free_cols:
        vec = [Fraction(0)] * n_cols
        vec[free] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            c = pivots[r]
            acc = Fraction(0)
            for j in range(c + 1, n_cols):
                if vec[j]:
                    acc += rows[r][j] * vec[j]
            vec[c] = -acc / rows[r][c]
        basis.append(tuple(vec))
    return basis


def left_null_space(matrix) -> list[tuple[Fraction, ...]]:
    """Basis of {y : y A = 0}, i.e. the orthogonal complement of the column
    span, with vectors living in the row space dimension."""
    rows = _as_rows(matrix)
    if not rows:
        return []
    transposed = [list(col) for col in zip(*rows)]
    if not transposed:
        return []
    return null_space(transposed)


def kernel_basis(matrix, side: str = "left") -> list[tuple[Fraction, ...]]:
    """Kernel in the caller-named orientation.

    side="right": vectors x with A x = 0.  side="left": vectors y orthogonal
    to every column of A, the orientation used when splitting the ambient
    space into column span plus complement.
    """
    if side == "right":
        return null_space(matrix)
    if side == "left":
        return left_null_space(matrix)
    raise ValueError("side must be 'left' or 'right'")


def in_column_span(matrix, vec) -> bool:
    """Exact membership of `vec` in the span of the matrix columns."""
    rows = _as_rows(matrix)
    vec = [Fraction(x) for x in vec]
    if not rows:
        return all(x == 0 for x in vec)
    base_rank = rank(rows)
    extended = [row + [v] for row, v in zip(rows, vec)]
    return rank(extended) == base_rank
