import random
from fractions import Fraction
from itertools import product

import pytest

from dimgroup.errors import (DimensionMismatch, NotIntegerEigenvalue,
                             NotNonnegative, NotPrimitive)
from dimgroup.exact import Matrix
from dimgroup.perron import (ShiftEquivalence, check_equal_sums_criterion,
                             check_shift_equivalence, integer_perron,
                             is_primitive, unique_trace_diagnostic)


def test_is_primitive_examples():
    assert is_primitive(Matrix.from_rows([[1, 1], [1, 0]]))
    assert not is_primitive(Matrix.from_rows([[0, 1], [1, 0]]))
    assert is_primitive(Matrix.from_rows([[2]]))
    assert not is_primitive(Matrix.from_rows([[0]]))
    with pytest.raises(NotNonnegative):
        is_primitive(Matrix.from_rows([[1, -1], [1, 1]]))


def test_is_primitive_transpose_symmetry():
    rng = random.Random(23)
    for _ in range(200):
        n = rng.randint(1, 6)
        m = Matrix.from_rows([[rng.randint(0, 2) if rng.random() < 0.5 else 0
                               for _ in range(n)] for _ in range(n)])
        assert is_primitive(m) == is_primitive(m.transpose())


def test_integer_perron_examples():
    pd = integer_perron(Matrix.from_rows([[1, 2], [2, 1]]))
    assert (pd.eigenvalue, pd.left, pd.right) == (3, (1, 1), (1, 1))
    pd = integer_perron(Matrix.from_rows([[7, 8], [8, 7]]))
    assert (pd.eigenvalue, pd.left, pd.right) == (15, (1, 1), (1, 1))
    with pytest.raises(NotIntegerEigenvalue):
        integer_perron(Matrix.from_rows([[1, 1], [1, 0]]))   # golden mean
    with pytest.raises(NotPrimitive):
        integer_perron(Matrix.from_rows([[0, 1], [1, 0]]))


def test_integer_perron_verifies():
    pd = integer_perron(Matrix.from_rows([[3, 1], [2, 2]]))
    assert pd.eigenvalue == 4
    assert pd.left == (2, 1)
    assert pd.right == (1, 1)
    assert pd.verify(Matrix.from_rows([[3, 1], [2, 2]]))


def test_check_equal_sums_examples():
    rep = check_equal_sums_criterion(Matrix.from_rows([[7, 8], [8, 7]]))
    assert rep.inner_product == 2 == rep.size and rep.sums_equal
    rep = check_equal_sums_criterion(Matrix.from_rows([[1, 2], [2, 1]]))
    assert rep.inner_product == 2 and rep.sums_equal
    rep = check_equal_sums_criterion(Matrix.from_rows([[3, 1], [2, 2]]))
    assert rep.inner_product == 3 != rep.size and not rep.sums_equal


def _raw_primitive(rows, n):
    full = (1 << n) - 1
    base = [sum(1 << j for j in range(n) if rows[i][j]) for i in range(n)]
    power = base
    for _ in range((n - 1) ** 2 + 1):
        if all(r == full for r in power):
            return True
        nxt = []
        for i in range(n):
            acc = 0
            bits = power[i]
            j = 0
            while bits:
                if bits & 1:
                    acc |= base[j]
                bits >>= 1
                j += 1
            nxt.append(acc)
        power = nxt
    return all(r == full for r in power)


def _raw_has_integer_root(rows, n, lo, hi):
    for r in range(lo, hi + 1):
        a = [[rows[i][j] - (r if i == j else 0) for j in range(n)]
             for i in range(n)]
        if n == 1:
            det = a[0][0]
        elif n == 2:
            det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
        else:
            det = (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                   - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                   + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))
        if det == 0:
            return True
    return False


def test_equal_sums_criterion_exhaustive_small():
    """Exhaustive check of the criterion over primitive matrices with
    entries <= 3 and size <= 3 having an integer Perron value: an inner
    product equal to the size must force equal row and column sums.  The
    library call raises if the implication ever fails.  Raw-int prefilters
    keep the loop fast; every survivor goes through the library."""
    checked = 0
    for n in (1, 2, 3):
        for entries in product(range(4), repeat=n * n):
            rows = [list(entries[i * n:(i + 1) * n]) for i in range(n)]
            row_sums = [sum(r) for r in rows]
            col_sums = [sum(rows[i][j] for i in range(n)) for j in range(n)]
            if len(set(row_sums)) == 1 and len(set(col_sums)) == 1:
                continue   # conclusion already true, nothing to falsify
            if not _raw_primitive(rows, n):
                continue
            if not _raw_has_integer_root(rows, n, min(col_sums), max(col_sums)):
                continue
            m = Matrix.from_rows(rows)
            assert is_primitive(m)
            try:
                rep = check_equal_sums_criterion(m)   # raises on a violation
            except NotIntegerEigenvalue:
                continue
            assert rep.inner_product != rep.size
            checked += 1
    assert checked > 1000   # the search space was genuinely populated


def test_unique_trace_diagnostic_stationary():
    # eigenvalues 3 and -1: the normalized deviation is 3^-h, which crosses
    # the 1e-6 tolerance between horizons 12 and 14
    a = Matrix.from_rows([[1, 2], [2, 1]])
    rep = unique_trace_diagnostic([a], 14)
    assert rep.numeric_rank_at_tol == 1
    half = Fraction(1, 2)
    for i in range(2):
        for j in range(2):
            assert abs(rep.limit_matrix[i, j] - half) < Fraction(1, 10 ** 5)
    rep12 = unique_trace_diagnostic([a], 12)
    assert rep12.numeric_rank_at_tol == 2   # (1/3)^12 is still above 1e-6


def test_unique_trace_diagnostic_identity():
    rep = unique_trace_diagnostic([Matrix.identity(2)], 5)
    assert rep.numeric_rank_at_tol == 2
    assert rep.limit_matrix == Matrix.from_rows([[Fraction(1), Fraction(0)],
                                                 [Fraction(0), Fraction(1)]])


def test_unique_trace_diagnostic_two_pure_traces():
    # The classical two-pure-trace family keeps the diagnostic rank at 2.
    mats = [Matrix.from_rows([[1, 2 ** j], [2 ** j, 1]]) for j in range(1, 7)]
    rep = unique_trace_diagnostic(mats, 6)
    assert rep.numeric_rank_at_tol == 2


def test_unique_trace_commuting_family():
    from dimgroup.ecrs import commuting_family
    seq = commuting_family(Matrix.from_rows([[1, 2], [2, 1]]), [5, 13, 17])
    rep = unique_trace_diagnostic(list(seq.matrices), 12)
    assert rep.numeric_rank_at_tol == 1
    # simultaneous conjugation (here by a permutation, keeping entries
    # nonnegative) does not change the verdict
    perm = Matrix.from_rows([[0, 1], [1, 0]])
    conjugated = [perm * m * perm for m in seq.matrices]
    rep = unique_trace_diagnostic(conjugated, 12)
    assert rep.numeric_rank_at_tol == 1


def test_unique_trace_diagnostic_errors():
    from dimgroup.errors import NonSquare, SizeMismatch
    with pytest.raises(SizeMismatch):
        unique_trace_diagnostic([], 3)
    with pytest.raises(NonSquare):
        unique_trace_diagnostic([Matrix.from_rows([[1, 2]])], 3)
    with pytest.raises(SizeMismatch):
        unique_trace_diagnostic([Matrix.identity(2), Matrix.identity(3)], 3)


def test_shift_equivalence():
    a = Matrix.from_rows([[1, 2], [2, 1]])
    assert check_shift_equivalence(a, a, ShiftEquivalence(a, a, 2))
    i2 = Matrix.identity(2)
    assert check_shift_equivalence(i2, i2, ShiftEquivalence(i2, i2, 1))
    bad = ShiftEquivalence(Matrix.from_rows([[1, 2], [2, 2]]), a, 2)
    assert not check_shift_equivalence(a, a, bad)
    with pytest.raises(DimensionMismatch):
        check_shift_equivalence(a, Matrix.identity(3),
                                ShiftEquivalence(a, a, 1))
