"""Exact integer / rational linear algebra and GL(k,Z) machinery.

Everything here is exact: matrices hold Python ints or ``fractions.Fraction``
entries, determinants and ranks come from fraction-free (Bareiss) or rational
elimination, and unimodular transforms are retained as replayable lists of
elementary operations so whole matrix sequences can be conjugated
simultaneously.  No floating point anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ContentMismatch, DimensionMismatch, NonSquare, Unsolvable

Number = int | Fraction


def _as_exact(x) -> Number:
    if isinstance(x, (int, Fraction)):
        return x
    raise TypeError(f"inexact entry {x!r} of type {type(x).__name__}")


class Matrix:
    """Immutable exact matrix (entries: int or Fraction), row-major."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Sequence[Number]):
        if rows <= 0 or cols <= 0:
            raise DimensionMismatch(f"dimensions must be positive, got {rows}x{cols}")
        if len(data) != rows * cols:
            raise DimensionMismatch(
                f"entry storage {len(data)} != {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self._data = tuple(_as_exact(x) for x in data)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Number]]) -> "Matrix":
        r = len(rows)
        if r == 0:
            raise DimensionMismatch("no rows")
        c = len(rows[0])
        for row in rows:
            if len(row) != c:
                raise DimensionMismatch("ragged rows")
        return cls(r, c, [x for row in rows for x in row])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def column(cls, entries: Sequence[Number]) -> "Matrix":
        return cls(len(entries), 1, list(entries))

    @classmethod
    def row_vector(cls, entries: Sequence[Number]) -> "Matrix":
        return cls(1, len(entries), list(entries))

    # -- access --------------------------------------------------------------

    def __getitem__(self, key: tuple[int, int]) -> Number:
        i, j = key
        return self._data[i * self.cols + j]

    def row(self, i: int) -> tuple[Number, ...]:
        return self._data[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[Number, ...]:
        return tuple(self._data[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list[Number]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_integral(self) -> bool:
        return all(isinstance(x, int) or x.denominator == 1 for x in self._data)

    def is_nonnegative(self) -> bool:
        return all(x >= 0 for x in self._data)

    # -- arithmetic ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, Matrix) and self.rows == other.rows
                and self.cols == other.cols
                and all(a == b for a, b in zip(self._data, other._data)))

    def __hash__(self):
        return hash((self.rows, self.cols, self._data))

    def __add__(self, other: "Matrix") -> "Matrix":
        self._require_same_shape(other)
        return Matrix(self.rows, self.cols,
                      [a + b for a, b in zip(self._data, other._data)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._require_same_shape(other)
        return Matrix(self.rows, self.cols,
                      [a - b for a, b in zip(self._data, other._data)])

    def __neg__(self) -> "Matrix":
        return Matrix(self.rows, self.cols, [-a for a in self._data])

    def scale(self, c: Number) -> "Matrix":
        return Matrix(self.rows, self.cols, [c * a for a in self._data])

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return self.__mul__(other)

    def __mul__(self, other: "Matrix") -> "Matrix":
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        n, m, p = self.rows, self.cols, other.cols
        a, b = self._data, other._data
        out = [0] * (n * p)
        for i in range(n):
            arow = a[i * m:(i + 1) * m]
            for k in range(m):
                aik = arow[k]
                if aik == 0:
                    continue
                brow = b[k * p:(k + 1) * p]
                base = i * p
                for j in range(p):
                    out[base + j] += aik * brow[j]
        return Matrix(n, p, out)

    def mul_vector(self, v: Sequence[Number]) -> tuple[Number, ...]:
        if len(v) != self.cols:
            raise DimensionMismatch("vector length mismatch")
        return tuple(sum(self[i, j] * v[j] for j in range(self.cols))
                     for i in range(self.rows))

    def vector_mul(self, v: Sequence[Number]) -> tuple[Number, ...]:
        """Row vector times matrix: v @ self."""
        if len(v) != self.rows:
            raise DimensionMismatch("vector length mismatch")
        return tuple(sum(v[i] * self[i, j] for i in range(self.rows))
                     for j in range(self.cols))

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows,
                      [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    def pow(self, e: int) -> "Matrix":
        if not self.is_square:
            raise NonSquare("matrix power needs a square matrix")
        result = Matrix.identity(self.rows)
        base = self
        while e > 0:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # -- sums and norms --------------------------------------------------------

    def column_sums(self) -> tuple[Number, ...]:
        return tuple(sum(self.col(j)) for j in range(self.cols))

    def row_sums(self) -> tuple[Number, ...]:
        return tuple(sum(self.row(i)) for i in range(self.rows))

    def _require_same_shape(self, other: "Matrix") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch("shape mismatch")

    def __repr__(self):
        return f"Matrix({self.to_rows()!r})"

    # -- exact elimination kernels ----------------------------------------------

    def det(self) -> Number:
        """Exact determinant; Bareiss fraction-free elimination on integer input."""
        if not self.is_square:
            raise NonSquare("determinant needs a square matrix")
        n = self.rows
        if all(isinstance(x, int) for x in self._data):
            return _det_bareiss([list(self.row(i)) for i in range(n)])
        m = [[Fraction(x) for x in self.row(i)] for i in range(n)]
        det = Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if m[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                m[c], m[piv] = m[piv], m[c]
                det = -det
            det *= m[c][c]
            inv = 1 / m[c][c]
            for r in range(c + 1, n):
                f = m[r][c] * inv
                if f:
                    for j in range(c, n):
                        m[r][j] -= f * m[c][j]
        return det

    def rank(self) -> int:
        """Rank over the rationals, by exact elimination."""
        m = [[Fraction(x) for x in self.row(i)] for i in range(self.rows)]
        rank = 0
        row = 0
        for c in range(self.cols):
            piv = next((r for r in range(row, self.rows) if m[r][c] != 0), None)
            if piv is None:
                continue
            m[row], m[piv] = m[piv], m[row]
            inv = 1 / m[row][c]
            for r in range(row + 1, self.rows):
                f = m[r][c] * inv
                if f:
                    for j in range(c, self.cols):
                        m[r][j] -= f * m[row][j]
            rank += 1
            row += 1
            if row == self.rows:
                break
        return rank

    def charpoly(self) -> tuple[int | Fraction, ...]:
        """Coefficients of det(xI - A), descending degree, leading 1.

        Division-free (Berkowitz), so integer matrices give integer
        coefficients exactly.
        """
        if not self.is_square:
            raise NonSquare("characteristic polynomial needs a square matrix")
        n = self.rows
        coeffs: list[Number] = [1]
        for k in range(1, n + 1):
            a = self[k - 1, k - 1]
            r_row = [self[k - 1, j] for j in range(k - 1)]
            c_col = [self[i, k - 1] for i in range(k - 1)]
            # Toeplitz column: [1, -a, -R C, -R M C, -R M^2 C, ...]
            t: list[Number] = [1, -a]
            v = c_col
            for _ in range(2, k + 1):
                t.append(-sum(ri * vi for ri, vi in zip(r_row, v)))
                v = [sum(self[i, j] * v[j] for j in range(k - 1))
                     for i in range(k - 1)]
            new = [0] * (k + 1)
            for i in range(k + 1):
                new[i] = sum(t[i - j] * coeffs[j]
                             for j in range(max(0, i - len(t) + 1), min(i, k - 1) + 1))
            coeffs = new
        return tuple(coeffs)

    def charpoly_at(self, x: Number) -> Number:
        """Evaluate det(xI - A) exactly (Horner)."""
        acc: Number = 0
        for c in self.charpoly():
            acc = acc * x + c
        return acc

    def inverse(self) -> "Matrix":
        """Exact inverse over the rationals (Gauss-Jordan on Fractions)."""
        if not self.is_square:
            raise NonSquare("inverse needs a square matrix")
        n = self.rows
        a = [[Fraction(self[i, j]) for j in range(n)]
             + [Fraction(1 if i == j else 0) for j in range(n)]
             for i in range(n)]
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c] != 0), None)
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            a[c], a[piv] = a[piv], a[c]
            inv = 1 / a[c][c]
            a[c] = [x * inv for x in a[c]]
            for r in range(n):
                if r != c and a[r][c] != 0:
                    f = a[r][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return Matrix(n, n, [a[i][j + n] for i in range(n) for j in range(n)])


def _det_bareiss(m: list[list[int]]) -> int:
    n = len(m)
    sign = 1
    prev = 1
    for c in range(n - 1):
        if m[c][c] == 0:
            piv = next((r for r in range(c + 1, n) if m[r][c] != 0), None)
            if piv is None:
                return 0
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                m[r][j] = (m[r][j] * m[c][c] - m[r][c] * m[c][j]) // prev
            m[r][c] = 0
        prev = m[c][c]
    return sign * m[-1][-1]


# -- vector helpers -----------------------------------------------------------


def content(v: Iterable[int]) -> int:
    """gcd of the absolute values of the nonzero entries; 0 for the zero vector."""
    g = 0
    for x in v:
        g = math.gcd(g, abs(x))
    return g


def dot(u: Sequence[Number], v: Sequence[Number]) -> Number:
    if len(u) != len(v):
        raise DimensionMismatch("dot length mismatch")
    return sum(a * b for a, b in zip(u, v))


def vec_add(u: Sequence[Number], v: Sequence[Number]) -> tuple[Number, ...]:
    return tuple(a + b for a, b in zip(u, v))

def vec_sub(u: Sequence[Number], v: Sequence[Number]) -> tuple[Number, ...]:
    return tuple(a - b for a, b in zip(u, v))

def vec_scale(c: Number, v: Sequence[Number]) -> tuple[Number, ...]:
    return tuple(c * a for a in v)


def sup_norm(v: Sequence[Number]) -> Number:
    """Max absolute value (the row-norm convention used throughout)."""
    return max((abs(x) for x in v), default=0)


def rank_rational(m: Matrix) -> int:
    return m.rank()


def is_unimodular(e: Matrix) -> bool:
    """True iff e is square with determinant +-1 (exact)."""
    if not e.is_square:
        raise NonSquare("unimodularity needs a square matrix")
    return abs(e.det()) == 1


def colsum_norm(m: Matrix) -> Number:
    """Max absolute column sum (the matrix-norm convention used throughout)."""
    return max(sum(abs(m[i, j]) for i in range(m.rows)) for j in range(m.cols))


def right_kernel_basis(m: Matrix) -> list[tuple[int, ...]]:
    """Integer basis of the rational right kernel, each vector of content 1.

    Vectors are sign-normalized so their first nonzero entry is positive.
    """
    rows, cols = m.rows, m.cols
    a = [[Fraction(m[i, j]) for j in range(cols)] for i in range(rows)]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for pr, pc in enumerate(pivots):
            v[pc] = -a[pr][fc]
        basis.append(_integerize(v))
    return basis


def _integerize(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to integers with content 1, first nonzero > 0."""
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = content(ints)
    if g > 1:
        ints = [x // g for x in ints]
    lead = next((x for x in ints if x != 0), 0)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


# -- unimodular transforms ------------------------------------------------------

# Elementary operations, each standing for an elementary matrix:
#   ("swap", i, j)   : identity with rows i and j exchanged
#   ("neg", i)       : identity with -1 in position (i, i)
#   ("add", i, j, m) : I + m * E_ij   (i != j)
# A transform's matrix is the product mat(op_0) * mat(op_1) * ... in order.
ElementaryOp = tuple


def _op_matrix(size: int, op: ElementaryOp) -> Matrix:
    e = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    kind = op[0]
    if kind == "swap":
        _, i, j = op
        e[i][i] = e[j][j] = 0
        e[i][j] = e[j][i] = 1
    elif kind == "neg":
        _, i = op
        e[i][i] = -1
    elif kind == "add":
        _, i, j, m = op
        e[i][j] = m
    else:
        raise ValueError(f"unknown elementary op {op!r}")
    return Matrix.from_rows(e)


def _invert_op(op: ElementaryOp) -> ElementaryOp:
    if op[0] == "add":
        _, i, j, m = op
        return ("add", i, j, -m)
    return op


def _apply_op_row(vec: list, op: ElementaryOp) -> None:
    """vec <- mat(op) @ vec, for vec a column stored as a list."""
    kind = op[0]
    if kind == "swap":
        _, i, j = op
        vec[i], vec[j] = vec[j], vec[i]
    elif kind == "neg":
        _, i = op
        vec[i] = -vec[i]
    else:
        _, i, j, m = op
        vec[i] = vec[i] + m * vec[j]


def _apply_op_col(vec: list, op: ElementaryOp) -> None:
    """vec <- vec @ mat(op), for vec a row stored as a list."""
    kind = op[0]
    if kind == "swap":
        _, i, j = op
        vec[i], vec[j] = vec[j], vec[i]
    elif kind == "neg":
        _, i = op
        vec[i] = -vec[i]
    else:
        _, i, j, m = op
        vec[j] = vec[j] + m * vec[i]


@dataclass(frozen=True)
class UnimodularTransform:
    """An element of GL(k,Z) carried together with its elementary factorization.

    Replaying the factorization (multiplying the elementary matrices in
    order) reproduces ``matrix`` exactly; |det| = 1 by construction.
    """

    size: int
    ops: tuple[ElementaryOp, ...]

    @property
    def matrix(self) -> Matrix:
        m = Matrix.identity(self.size)
        for op in self.ops:
            m = m * _op_matrix(self.size, op)
        return m

    def replay(self) -> Matrix:
        return self.matrix

    def inverse(self) -> "UnimodularTransform":
        return UnimodularTransform(
            self.size, tuple(_invert_op(op) for op in reversed(self.ops)))

    def det(self) -> int:
        d = 1
        for op in self.ops:
            if op[0] in ("swap", "neg"):
                d = -d
        return d

    def embed(self, size: int, offset: int) -> "UnimodularTransform":
        """The same transform acting on coordinates [offset, offset+k) of Z^size."""
        shifted = []
        for op in self.ops:
            if op[0] == "add":
                shifted.append(("add", op[1] + offset, op[2] + offset, op[3]))
            elif op[0] == "swap":
                shifted.append(("swap", op[1] + offset, op[2] + offset))
            else:
                shifted.append(("neg", op[1] + offset))
        return UnimodularTransform(size, tuple(shifted))

    def compose(self, other: "UnimodularTransform") -> "UnimodularTransform":
        """Transform whose matrix is self.matrix @ other.matrix."""
        if self.size != other.size:
            raise DimensionMismatch("transform size mismatch")
        return UnimodularTransform(self.size, self.ops + other.ops)


def _euclid_to_first(row: Sequence[int]) -> tuple[list[ElementaryOp], int]:
    """Column operations sending an integer row to (g, 0, ..., 0), g = content >= 0.

    Returns (ops, g) with ops in application order: row @ mat(ops...) = g e_0.
    """
    work = list(row)
    ops: list[ElementaryOp] = []

    def apply(op: ElementaryOp) -> None:
        _apply_op_col(work, op)
        ops.append(op)

    for j in range(1, len(work)):
        # Euclid on positions (0, j) until position j clears; each pass
        # strictly shrinks |work[j]| after the swap, so it terminates.
        while work[j] != 0:
            if work[0] != 0:
                q = work[0] // work[j]
                if q != 0:
                    apply(("add", j, 0, -q))  # entry 0 -= q * entry j
            apply(("swap", 0, j))
    if work[0] < 0:
        apply(("neg", 0))
    return ops, work[0]


def map_content1_row(r: Sequence[int], target: Sequence[int]) -> UnimodularTransform:
    """E in GL(k,Z) with r @ E^{-1} = target, for rows of equal content.

    Built by Euclidean column reduction of both rows to (g, 0, ..., 0) and
    splicing the two reductions.
    """
    if len(r) != len(target):
        raise DimensionMismatch("row length mismatch")
    if content(r) != content(target):
        raise ContentMismatch(
            f"contents differ: {content(r)} vs {content(target)}")
    k = len(r)
    ops1, g1 = _euclid_to_first(r)
    ops2, g2 = _euclid_to_first(target)
    if g1 != g2:
        raise Unsolvable(f"reductions disagree: {g1} vs {g2}")
    u1 = UnimodularTransform(k, tuple(ops1))
    u2 = UnimodularTransform(k, tuple(ops2))
    # r @ U1 = g e0 = target @ U2, hence r @ (U1 U2^{-1}) = target; E^{-1} = U1 U2^{-1}.
    e = u2.compose(u1.inverse())
    return e
