"""Traces induced by ECS realizations, goodness of simplicial rows, and the
equal-trace splitting step."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DimensionMismatch, NotECS, NotNonnegative, OutOfRange, ZeroRow
from .exact import Matrix, content, right_kernel_basis
from .realization import RealizationSeq
from .supernatural import SupernaturalNumber, from_factors, quotient_order


def _stage_column_sums(seq: RealizationSeq) -> list[int]:
    sums = []
    for idx, m in enumerate(seq.matrices, start=1):
        cs = set(m.column_sums())
        if len(cs) != 1:
            raise NotECS(f"unequal column sums {sorted(cs)}", stage=idx)
        sums.append(cs.pop())
    return sums


def trace_of_realization(seq: RealizationSeq,
                         elem: tuple[Sequence[int], int]) -> Fraction:
    """Value of the canonical ECS trace on [w, level]: coordinate sum of w
    divided by the product of the column sums of the earlier stages."""
    w, level = elem
    sums = _stage_column_sums(seq)
    sizes = seq.level_sizes()
    if not 1 <= level <= len(sizes):
        raise DimensionMismatch(f"level {level} out of range")
    if len(w) != sizes[level - 1]:
        raise DimensionMismatch(
            f"vector length {len(w)} != level size {sizes[level - 1]}")
    denom = 1
    for c in sums[:level - 1]:
        denom *= c
    return Fraction(sum(w), denom)


@dataclass(frozen=True)
class TraceReport:
    """Canonical trace data of an ECS realization."""

    level_unit_values: tuple[Fraction, ...]   # trace of a basis vector per level
    value_group: SupernaturalNumber           # union of (1/prod c_i) Z, prefix
    faithful_claim: bool                      # by construction for ECS
    lam: int | None                           # |tau(G)/tau(H)| for an all-ones marker

    def to_json(self) -> dict:
        return {
            "level_unit_values": [str(v) for v in self.level_unit_values],
            "value_group": self.value_group.to_json(),
            "faithful": self.faithful_claim,
            "lambda": self.lam,
        }


def trace_report(seq: RealizationSeq) -> TraceReport:
    sums = _stage_column_sums(seq)
    units = [Fraction(1)]
    for c in sums:
        units.append(units[-1] / c)
    nontrivial = [c for c in sums if c > 1]
    group = from_factors(nontrivial) if nontrivial else SupernaturalNumber()
    lam = None
    sizes = seq.level_sizes()
    if (seq.markers is not None and len(set(sizes)) == 1
            and all(all(x == 1 for x in h) for h in seq.markers)):
        # tau(H) = s * tau(G), so the index is |U/sU| on the prefix.
        lam = quotient_order(group, sizes[0])
    return TraceReport(tuple(units), group, True, lam)


def is_good_row(w: Sequence[int]) -> bool:
    """Goodness of the trace v -> w.v on the simplicial group.

    Normalizes by the content first (goodness is scale-invariant for these
    traces), then requires every nonzero entry to equal 1."""
    if any(x < 0 for x in w):
        raise NotNonnegative("row must be nonnegative")
    g = content(w)
    if g == 0:
        raise ZeroRow("goodness undefined for the zero row")
    return all(x == 0 or x == g for x in w)


def rebalance(b: Sequence[int], m: int) -> tuple[int, ...]:
    """Some 0 <= c <= b with coordinate sum m, by unit transfers.

    The choice is the greedy one; any vector meeting the postcondition is
    acceptable to callers."""
    if any(x < 0 for x in b):
        raise NotNonnegative("b must be nonnegative")
    total = sum(b)
    if m < 0 or m > total:
        raise OutOfRange(f"m={m} outside [0, {total}]")
    c = []
    left = m
    for x in b:
        take = min(x, left)
        c.append(take)
        left -= take
    return tuple(c)


def split_to_equal_trace(a: Sequence[int]) -> Matrix:
    """The 0/1 simplicial splitting matrix for positive weights a.

    Shape (sum a) x len(a): column j carries exactly a_j ones, every row
    exactly one; composing with the all-ones row recovers a, and all image
    basis vectors get equal per-unit trace value."""
    if not a or any(x < 1 for x in a):
        raise OutOfRange("all weights must be >= 1")
    total = sum(a)
    rows = []
    for j, count in enumerate(a):
        for _ in range(count):
            row = [0] * len(a)
            row[j] = 1
            rows.append(row)
    return Matrix.from_rows(rows)


@dataclass(frozen=True)
class NearlySplitReport:
    has_common_right_evec: bool
    has_common_left_evec: bool
    nearly_split_implied: bool

    def to_json(self) -> dict:
        return {
            "common_right_eigenvector": self.has_common_right_evec,
            "common_left_eigenvector": self.has_common_left_evec,
            "nearly_split_implied": self.nearly_split_implied,
        }


def nearly_split_witness(seq: RealizationSeq) -> NearlySplitReport:
    """Looks for one integer vector that is a right eigenvector of every
    stage matrix at its designed eigenvalue, and a row that is a left
    eigenvector of every stage, with nonzero pairing; both found with a
    nonzero pairing forces the trace extension to be nearly split."""
    sizes = set(seq.level_sizes())
    if len(sizes) != 1:
        return NearlySplitReport(False, False, False)
    s = sizes.pop()
    shifted = [m - Matrix.identity(s).scale(p)
               for m, p in zip(seq.matrices, seq.stage_values)]
    stacked = Matrix.from_rows(
        [list(m.row(i)) for m in shifted for i in range(s)])
    right_basis = right_kernel_basis(stacked)
    stacked_t = Matrix.from_rows(
        [list(m.transpose().row(i)) for m in shifted for i in range(s)])
    left_basis = right_kernel_basis(stacked_t)
    has_right = bool(right_basis)
    has_left = bool(left_basis)
    pairing = any(sum(l * r for l, r in zip(w, v)) != 0
                  for w in left_basis for v in right_basis)
    return NearlySplitReport(has_right, has_left,
                             has_right and has_left and pairing)
