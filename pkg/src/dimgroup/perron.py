"""Primitivity, integer Perron data, the equal-sums criterion, the unique-trace
diagnostic, and shift-equivalence checking."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (DimensionMismatch, NonSquare, NotIntegerEigenvalue,
                     NotNonnegative, NotPrimitive, SizeMismatch)
from .exact import Matrix, right_kernel_basis


def is_primitive(a: Matrix) -> bool:
    """True iff some power of the nonnegative square matrix a is entrywise
    positive; powers of the zero pattern are tested up to the Wielandt bound
    (s-1)^2 + 1, so entries never blow up."""
    if not a.is_square:
        raise NonSquare("primitivity needs a square matrix")
    if not a.is_nonnegative():
        raise NotNonnegative("primitivity test requires nonnegative entries")
    s = a.rows
    full = (1 << s) - 1
    base = [sum(1 << j for j in range(s) if a[i, j] != 0) for i in range(s)]
    power = base
    bound = (s - 1) ** 2 + 1
    for _ in range(bound):
        if all(row == full for row in power):
            return True
        power = [_or_combine(power[i], base) for i in range(s)]
    return all(row == full for row in power)


def _or_combine(row_bits: int, pattern: list[int]) -> int:
    out = 0
    j = 0
    bits = row_bits
    while bits:
        if bits & 1:
            out |= pattern[j]
        bits >>= 1
        j += 1
    return out


@dataclass(frozen=True)
class PerronData:
    """Integer Perron eigenvalue with content-1, strictly positive integer
    left (row) and right (column) eigenvectors."""

    eigenvalue: int
    left: tuple[int, ...]
    right: tuple[int, ...]
    size: int

    def verify(self, a: Matrix) -> bool:
        lam = self.eigenvalue
        left_ok = a.vector_mul(self.left) == tuple(lam * x for x in self.left)
        right_ok = a.mul_vector(self.right) == tuple(lam * x for x in self.right)
        return left_ok and right_ok


def integer_perron(a: Matrix) -> PerronData:
    """Perron data for a primitive matrix whose Perron eigenvalue is an integer.

    Scans integer candidates between the extreme column sums (the classical
    bounds for the spectral radius), largest first, and certifies the root by
    exact kernel computation: ker(a - rI) must be one-dimensional with a
    strictly positive content-1 vector.  Raises NotIntegerEigenvalue when no
    integer root exists, which signals input outside this library's
    constructions.
    """
    if not is_primitive(a):
        raise NotPrimitive("integer_perron requires a primitive matrix")
    sums = a.column_sums()
    lo, hi = min(sums), max(sums)
    root = None
    for r in range(hi, lo - 1, -1):
        if a.charpoly_at(r) == 0:
            root = r
            break
    if root is None:
        raise NotIntegerEigenvalue(
            f"no integer Perron root in column-sum range [{lo}, {hi}]")
    shifted = a - Matrix.identity(a.rows).scale(root)
    right = right_kernel_basis(shifted)
    left = right_kernel_basis(shifted.transpose())
    if len(right) != 1 or len(left) != 1:
        raise NotIntegerEigenvalue(
            f"eigenvalue {root} is not geometrically simple")
    rvec, lvec = right[0], left[0]
    if not all(x > 0 for x in rvec) or not all(x > 0 for x in lvec):
        raise NotIntegerEigenvalue(
            f"eigenvalue {root} has no strictly positive eigenvector")
    return PerronData(root, lvec, rvec, a.rows)


@dataclass(frozen=True)
class EqualSumsReport:
    inner_product: int
    size: int
    sums_equal: bool


def check_equal_sums_criterion(a: Matrix) -> EqualSumsReport:
    """Inner product of the content-1 Perron eigenvectors versus the size.

    When they coincide, equal row sums and equal column sums must follow;
    a violation would falsify the criterion itself, so it raises."""
    data = integer_perron(a)
    inner = sum(l * r for l, r in zip(data.left, data.right))
    rows = a.row_sums()
    cols = a.column_sums()
    sums_equal = len(set(rows)) == 1 and len(set(cols)) == 1
    if inner == data.size and not sums_equal:
        raise AssertionError(
            "equal-sums criterion violated: VW == size but sums differ "
            f"(rows {rows}, cols {cols})")
    return EqualSumsReport(inner, data.size, sums_equal)


@dataclass(frozen=True)
class UniqueTraceReport:
    limit_matrix: Matrix          # normalized product, exact rational entries
    numeric_rank_at_tol: int
    horizon: int
    tol: Fraction


def unique_trace_diagnostic(seq: Sequence[Matrix], horizon: int,
                            tol: Fraction = Fraction(1, 10 ** 6)) -> UniqueTraceReport:
    """Normalized product C_m ... C_1 / prod rho(C_i) at the horizon, newest
    factor on the left, with its numerical rank at the tolerance.

    All matrices must be square of one size, nonnegative and primitive with
    integer Perron values (the only case this library's constructions produce).
    A sequence shorter than the horizon is cycled.  The rank is computed by
    exact rational elimination in which entries below tol are flushed to
    zero; the tolerance never feeds back into any construction.
    """
    if not seq:
        raise SizeMismatch("empty sequence")
    size = seq[0].rows
    for m in seq:
        if not m.is_square:
            raise NonSquare("diagnostic needs square matrices")
        if m.rows != size:
            raise SizeMismatch("diagnostic needs matrices of one size")
    tol = Fraction(tol)
    product = Matrix.identity(size)
    denom = 1
    for idx in range(horizon):
        c = seq[idx % len(seq)]
        product = c * product          # newest on the left
        denom *= _dominant_integer_root(c)
    limit = Matrix(size, size, [Fraction(x, denom) for x in
                                [product[i, j] for i in range(size)
                                 for j in range(size)]])
    rank = _rank_at_tolerance(limit, tol)
    return UniqueTraceReport(limit, rank, horizon, tol)


def _dominant_integer_root(c: Matrix) -> int:
    """Largest integer root of the characteristic polynomial within the
    column-sum bounds; the spectral radius for every matrix this library
    builds.  Unlike integer_perron this does not insist on primitivity, so
    degenerate diagnostics (e.g. identity sequences) still normalize."""
    if not c.is_nonnegative():
        raise NotNonnegative("diagnostic requires nonnegative matrices")
    sums = c.column_sums()
    lo, hi = min(sums), max(sums)
    for r in range(hi, max(lo, 1) - 1, -1):
        if c.charpoly_at(r) == 0:
            return r
    raise NotIntegerEigenvalue(
        f"no integer spectral radius in column-sum range [{lo}, {hi}]")


def _rank_at_tolerance(m: Matrix, tol: Fraction) -> int:
    rows = [[x if abs(x) >= tol else Fraction(0) for x in m.row(i)]
            for i in range(m.rows)]
    rank = 0
    r = 0
    for c in range(m.cols):
        piv = None
        best = tol
        for i in range(r, m.rows):
            if abs(rows[i][c]) >= best:
                best = abs(rows[i][c])
                piv = i
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        for i in range(r + 1, m.rows):
            f = rows[i][c] * inv
            if f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
                rows[i] = [x if abs(x) >= tol else Fraction(0) for x in rows[i]]
        rank += 1
        r += 1
        if r == m.rows:
            break
    return rank


@dataclass(frozen=True)
class ShiftEquivalence:
    """Witness (X, Y, lag) for a shift equivalence between matrices A and M:
    XM = AX, MY = YA, XY = A^lag, YX = M^lag."""

    x: Matrix
    y: Matrix
    lag: int


def check_shift_equivalence(a: Matrix, m: Matrix, se: ShiftEquivalence) -> bool:
    """All four defining identities, by exact multiplication."""
    if not a.is_square or not m.is_square:
        raise NonSquare("shift equivalence needs square matrices")
    ya, sm = a.rows, m.rows
    if se.x.rows != ya or se.x.cols != sm or se.y.rows != sm or se.y.cols != ya:
        raise DimensionMismatch(
            f"X must be {ya}x{sm} and Y {sm}x{ya} for A of size {ya}, M of size {sm}")
    if se.lag < 1:
        raise DimensionMismatch("lag must be a positive integer")
    return (se.x * m == a * se.x
            and m * se.y == se.y * a
            and se.x * se.y == a.pow(se.lag)
            and se.y * se.x == m.pow(se.lag))
