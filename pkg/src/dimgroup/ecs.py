"""Construction of equal-column-sum realizations.

The split-case matrix, the general bordered matrices with their free
parameters, the GL(k,Z) reduction of the limiting ratio vector, extension
normalization / telescoping, the full pipeline, and the composition algebra
of the bordered matrices.

Conventions: an extension is presented by stages (p, v, B) standing for the
block matrix [[p, 0], [v, B]] of size k+1 (v a column); the bordered
realization matrices have size k+2 with the distinguished right kernel
vector z = (k+1, -1, ..., -1)^T.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (BadCutPoints, DimensionMismatch, HorizonExhausted,
                     Infeasible, NotNonnegative, NotPrimitive,
                     ParameterExtractionFailed, PTooSmall, SchemaError)
from .exact import (Matrix, UnimodularTransform, vec_add, vec_scale, vec_sub)
from .perron import is_primitive
from .realization import RealizationSeq

DEFAULT_EPSILON = Fraction(1, 100)


# -- data model -----------------------------------------------------------------


@dataclass(frozen=True)
class Stage:
    p: int
    v: tuple[int, ...]
    b: Matrix

    def __post_init__(self):
        if self.p <= 1:
            raise SchemaError(f"stage factor must exceed 1, got {self.p}")
        if not self.b.is_square or self.b.rows != len(self.v):
            raise DimensionMismatch("stage B must be k x k with v of length k")
        if self.b.det() == 0:
            raise SchemaError("stage B must have nonzero determinant")

    def block_matrix(self) -> Matrix:
        k = len(self.v)
        rows = [[self.p] + [0] * k]
        for i in range(k):
            rows.append([self.v[i]] + list(self.b.row(i)))
        return Matrix.from_rows(rows)


@dataclass(frozen=True)
class ExtensionData:
    """Finite presentation of a rank-(k+1) extension as stages (p, v, B)."""

    k: int
    stages: tuple[Stage, ...]

    def __post_init__(self):
        if self.k < 1:
            raise SchemaError("k must be >= 1")
        if not self.stages:
            raise SchemaError("need at least one stage")
        for st in self.stages:
            if len(st.v) != self.k:
                raise DimensionMismatch("stage vector length != k")

    @classmethod
    def from_json(cls, obj: dict) -> "ExtensionData":
        try:
            k = int(obj["k"])
            stages = tuple(
                Stage(int(st["p"]),
                      tuple(int(x) for x in st["v"]),
                      Matrix.from_rows([[int(x) for x in row] for row in st["B"]]))
                for st in obj["stages"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed extension data: {exc}") from None
        return cls(k, stages)

    def to_json(self) -> dict:
        return {"k": self.k,
                "stages": [{"p": st.p, "v": list(st.v), "B": st.b.to_rows()}
                           for st in self.stages]}


@dataclass(frozen=True)
class AParams:
    """Free integer parameters a_0 .. a_{k+1} subject to the rank-drop
    constraint sum(a_1..a_{k+1}) = (k+1) a_0."""

    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) < 3:
            raise SchemaError("need a_0 .. a_{k+1} with k >= 1")
        k = len(self.values) - 2
        if sum(self.values[1:]) != (k + 1) * self.values[0]:
            raise SchemaError(
                f"rank-drop constraint violated: sum {self.values[1:]} != "
                f"{k + 1} * {self.values[0]}")

    @classmethod
    def uniform(cls, k: int, a: int) -> "AParams":
        return cls(tuple([a] * (k + 2)))

    @property
    def a0(self) -> int:
        return self.values[0]


def eps_basis(k: int) -> tuple[tuple[int, ...], ...]:
    """The epsilon convention: eps_0 = 0, eps_i standard for 1 <= i <= k,
    eps_{k+1} = -(eps_1 + ... + eps_k); their sum over 1..k+1 vanishes."""
    zero = tuple([0] * k)
    std = [tuple(1 if j == i else 0 for j in range(k)) for i in range(k)]
    last = tuple([-1] * k)
    return tuple([zero] + std + [last])


def kernel_vector(k: int) -> tuple[int, ...]:
    """z = (k+1, -1, ..., -1)^T, the common right kernel of all the bordered
    matrices; independent of the stage."""
    return tuple([k + 1] + [-1] * (k + 1))


# -- matrix constructors -------------------------------------------------------


def split_ecs_matrix(k: int, p: int) -> Matrix:
    """The split-case (k+2)-size matrix: first column (p-k-1, 1, ..., 1),
    middle columns (p-1, e_i, 0), last column (p-k^2-k-1, k, ..., k, k+1);
    all column sums equal p."""
    if k < 1:
        raise SchemaError("k must be >= 1")
    if p <= (k + 1) ** 2:
        raise PTooSmall(f"need p > (k+1)^2 = {(k + 1) ** 2}, got {p}")
    top = [p - k - 1] + [p - 1] * k + [p - k * k - k - 1]
    rows = [top]
    for i in range(k):
        row = [1] + [1 if j == i else 0 for j in range(k)] + [k]
        rows.append(row)
    rows.append([1] + [0] * k + [k + 1])
    return Matrix.from_rows(rows)


def general_ecs_matrix(p: int, v: Sequence[int], b: Matrix,
                       a: AParams) -> Matrix:
    """The bordered (k+2)-size matrix for stage data (p, v, B) and free
    parameters a.

    Bottom row (a_0, ..., a_{k+1}); middle block columns: col 0 = v + a_0 1,
    cols 1..k = B + v 1^T + 1 (a_1..a_k), col k+1 = v - B 1 + a_{k+1} 1.  The
    top row is always computed as p minus the lower column sums, which makes
    the output ECS by construction; nonnegativity is checked by callers, not
    forced here.
    """
    k = len(v)
    if not b.is_square or b.rows != k or len(a.values) != k + 2:
        raise DimensionMismatch("inconsistent dimensions for bordered matrix")
    avals = a.values
    brow_sums = b.row_sums()
    middle = []
    for i in range(k):
        row = [v[i] + avals[0]]
        for j in range(k):
            row.append(b[i, j] + v[i] + avals[1 + j])
        row.append(v[i] - brow_sums[i] + avals[k + 1])
        middle.append(row)
    bottom = list(avals)
    top = [p - sum(middle[i][j] for i in range(k)) - bottom[j]
           for j in range(k + 2)]
    return Matrix.from_rows([top] + middle + [bottom])


def choose_a_params(p: int, v: Sequence[int], b: Matrix) -> AParams:
    """Smallest uniform a >= 1 making the bordered matrix nonnegative.

    All non-top entries increase with a and the top row decreases, so the
    minimal feasible a is forced; if even it fails the top row, p is too
    small relative to (v, B) and the caller should telescope further.
    """
    k = len(v)
    lower = 1
    brow_sums = b.row_sums()
    for i in range(k):
        lower = max(lower, -v[i])                      # column 0
        lower = max(lower, brow_sums[i] - v[i])        # column k+1
        for j in range(k):
            lower = max(lower, -(b[i, j] + v[i]))      # middle block
    a = AParams.uniform(k, lower)
    m = general_ecs_matrix(p, v, b, a)
    if not m.is_nonnegative():
        raise Infeasible(
            f"no uniform a makes the bordered matrix nonnegative at p={p}")
    return a


# -- GL(k,Z) reduction of the ratio vector -----------------------------------------


def reduce_vector(v: Sequence[Fraction]) -> tuple[UnimodularTransform, tuple[int, ...]]:
    """E in GL(k,Z) and integer W with E v - W entrywise >= 0 summing to < 1.

    Floor-subtract first, then repeat the division algorithm on the two
    largest entries until a single nonzero entry remains; on rational input
    the chain terminates with the 'gcd' in one slot, and the maximum never
    grows, so the remainder sum is below one.
    """
    vals = [Fraction(x) for x in v]
    if any(x < 0 for x in vals):
        raise NotNonnegative("reduce_vector needs a nonnegative vector")
    k = len(vals)
    w0 = [x.numerator // x.denominator for x in vals]
    work = [x - f for x, f in zip(vals, w0)]
    ops: list[tuple] = []
    guard = 0
    while True:
        nonzero = [i for i, x in enumerate(work) if x != 0]
        if len(nonzero) <= 1:
            break
        guard += 1
        if guard > 10 ** 6:
            raise AssertionError("reduction failed to terminate")
        s_idx = max(nonzero, key=lambda i: work[i])
        t_idx = max((i for i in nonzero if i != s_idx), key=lambda i: work[i])
        m = work[s_idx] // work[t_idx]   # >= 1 since work[s] >= work[t] > 0
        work[s_idx] -= m * work[t_idx]
        ops.append(("add", s_idx, t_idx, -m))
    e = UnimodularTransform(k, tuple(reversed(ops)))  # row ops compose right-to-left
    w = e.matrix.mul_vector(tuple(w0))
    return e, tuple(w)


# -- normalization, telescoping, convergence ---------------------------------------


def normalize_extension(data: ExtensionData) -> tuple[ExtensionData, list[tuple[int, ...]]]:
    """Equivalent data with 0 <= v < p entrywise, plus the correction
    vectors u^m; equivalence is witnessed by the commuting squares
    F_{m+1} M_m = M'_m F_m with F_m = [[1, 0], [d_m, I]], d_1 = 0 and
    d_{m+1} = -u^m."""
    k = data.k
    d = tuple([0] * k)
    stages = []
    us = []
    for st in data.stages:
        v_eff = vec_sub(st.v, st.b.mul_vector(d))
        u = tuple(x // st.p for x in v_eff)
        v_new = vec_sub(v_eff, vec_scale(st.p, u))
        stages.append(Stage(st.p, v_new, st.b))
        us.append(u)
        d = tuple(-x for x in u)
    return ExtensionData(k, tuple(stages)), us


def normalization_witnesses(us: Sequence[tuple[int, ...]], k: int) -> list[Matrix]:
    """The change-of-basis matrices F_1, ..., F_{n+1} for the u-vectors."""
    def f_matrix(d: tuple[int, ...]) -> Matrix:
        rows = [[1] + [0] * k]
        for i in range(k):
            rows.append([d[i]] + [1 if j == i else 0 for j in range(k)])
        return Matrix.from_rows(rows)

    mats = [f_matrix(tuple([0] * k))]
    for u in us:
        mats.append(f_matrix(tuple(-x for x in u)))
    return mats


def telescope_extension(data: ExtensionData,
                        cut_points: Sequence[int]) -> ExtensionData:
    """Group consecutive stages: each new stage is the exact block product of
    its group (later stages on the left), so new p is the product of the p's,
    new B the product of the B's, and new v the composed column."""
    n = len(data.stages)
    cuts = list(cut_points)
    if (not cuts or cuts[0] < 0 or cuts[-1] >= n
            or any(b <= a for a, b in zip(cuts, cuts[1:]))):
        raise BadCutPoints(f"bad cut points {cuts} for {n} stages")
    bounds = cuts + [n]
    stages = []
    for lo, hi in zip(bounds, bounds[1:]):
        st = data.stages[lo]
        p, v, b = st.p, st.v, st.b
        for i in range(lo + 1, hi):
            nxt = data.stages[i]
            v = vec_add(vec_scale(p, nxt.v), nxt.b.mul_vector(v))
            b = nxt.b * b
            p = p * nxt.p
        stages.append(Stage(p, v, b))
    return ExtensionData(data.k, tuple(stages))


def _ratio(st: Stage) -> tuple[Fraction, ...]:
    return tuple(Fraction(x, st.p) for x in st.v)


def _candidate_cuts(n: int):
    """(drop, block) candidates ordered from finest to coarsest; each must
    leave at least two groups (one pair to compare) unless only one stage
    exists at all."""
    if n == 1:
        yield [0]
        return
    for cost in range(0, 2 * n):
        for block in range(1, cost + 2):
            drop = cost - (block - 1)
            if drop < 0 or drop >= n:
                continue
            remaining = n - drop
            groups = -(-remaining // block)
            if groups < 2:
                continue
            yield list(range(drop, n, block))


def _ratios_converge(data: ExtensionData, cuts: Sequence[int],
                     epsilon: Fraction) -> bool:
    tele = telescope_extension(data, cuts)
    ratios = [_ratio(st) for st in tele.stages]
    for r1, r2 in zip(ratios, ratios[1:]):
        diff = max(abs(a - b) for a, b in zip(r1, r2))
        if diff != 0 and diff >= epsilon:
            return False
    return True


def select_convergent_prefix(data: ExtensionData,
                             epsilon: Fraction) -> list[int]:
    """Cut points after which consecutive telescoped ratios v/q differ by
    less than epsilon in max norm (exactly equal ratios always pass); the
    finite stand-in for extracting a convergent subsequence."""
    epsilon = Fraction(epsilon)
    for st in data.stages:
        if any(x < 0 or x >= st.p for x in st.v):
            raise SchemaError("select_convergent_prefix needs normalized data")
    for cuts in _candidate_cuts(len(data.stages)):
        if _ratios_converge(data, cuts, epsilon):
            return cuts
    raise HorizonExhausted(
        f"no grouping of {len(data.stages)} stages meets epsilon={epsilon}")


# -- the pipeline --------------------------------------------------------------


def _build_from_telescoped(tele: ExtensionData) -> RealizationSeq:
    k = tele.k
    # Renormalize: telescoping can push v outside [0, p) when B has negative
    # entries, and the reduction step needs a nonnegative terminal ratio.
    tele, _ = normalize_extension(tele)
    term = _ratio(tele.stages[-1])
    e, w = reduce_vector(term)
    em = e.matrix
    einv = e.inverse().matrix
    z = kernel_vector(k)
    mats = []
    values = []
    for idx, st in enumerate(tele.stages, start=1):
        b_new = em * st.b * einv
        v_new = vec_add(vec_add(vec_scale(st.p, w), em.mul_vector(st.v)),
                        tuple(-x for x in b_new.mul_vector(w)))
        try:
            a = choose_a_params(st.p, v_new, b_new)
        except Infeasible as exc:
            raise Infeasible(str(exc), stage=idx) from None
        m = general_ecs_matrix(st.p, v_new, b_new, a)
        if set(m.column_sums()) != {st.p}:
            raise AssertionError("column sums broke ECS by-construction")
        if m.mul_vector(z) != tuple([0] * (k + 2)):
            raise AssertionError("kernel vector not annihilated")
        if m.rank() != k + 1:
            raise AssertionError(f"rank {m.rank()} != k+1")
        if not is_primitive(m):
            raise NotPrimitive("stage matrix not primitive", stage=idx)
        mats.append(m)
        values.append(st.p)
    return RealizationSeq(tuple(mats), tuple(values), None, {"ecs": True},
                          {"pipeline": "ecs", "k": k})


def ecs_pipeline(data: ExtensionData,
                 epsilon: Fraction = DEFAULT_EPSILON) -> RealizationSeq:
    """Normalize, telescope until the ratio vectors nearly converge, reduce
    the terminal ratio with a single GL(k,Z) conjugation, pick uniform free
    parameters per stage and emit the bordered ECS matrices.

    Every emitted matrix is verified exactly: nonnegative, column sums equal
    to the stage p, kernel vector annihilated, rank k+1, primitive.  If a
    grouping fails (positivity or primitivity), coarser telescopings are
    tried before giving up.
    """
    norm, _ = normalize_extension(data)
    epsilon = Fraction(epsilon)
    last_error: Exception | None = None
    any_convergent = False
    for cuts in _candidate_cuts(len(norm.stages)):
        # retry only over groupings that still meet the convergence
        # criterion: coarser telescoping raises the stage values, which is
        # what cures positivity and primitivity failures
        if not _ratios_converge(norm, cuts, epsilon):
            continue
        any_convergent = True
        try:
            seq = _build_from_telescoped(telescope_extension(norm, cuts))
        except (Infeasible, NotPrimitive) as exc:
            last_error = exc
            continue
        prov = dict(seq.provenance)
        prov["cuts"] = cuts
        prov["epsilon"] = str(epsilon)
        return RealizationSeq(seq.matrices, seq.stage_values, seq.markers,
                              seq.properties, prov)
    if not any_convergent:
        raise HorizonExhausted(
            f"no grouping of {len(norm.stages)} stages meets epsilon={epsilon}")
    raise last_error


# -- the composition algebra of bordered matrices (uniform parameters) -------------


@dataclass(frozen=True)
class BParams:
    p: int
    b: Matrix
    v: tuple[int, ...]
    a: int


def b_matrix(params: BParams) -> Matrix:
    """The bordered matrix with uniform free parameter a: middle rows
    (v + a1, B + v 1^T + a 1 1^T, v - B1 + a1), bottom row (a, a 1^T, a),
    top row the complement making every column sum p.

    The right column is the bordered-construction one; it reduces to the
    v + (a-1)1 of the display exactly when B has unit row sums, and it is
    what makes the family closed under multiplication."""
    return general_ecs_matrix(params.p, params.v, params.b,
                              AParams.uniform(len(params.v), params.a))


def b_extract(m: Matrix) -> BParams:
    """Read the parameters back off a matrix of B-form; raises
    ParameterExtractionFailed when the matrix is not of that shape."""
    size = m.rows
    if size != m.cols or size < 3:
        raise ParameterExtractionFailed("wrong shape for B-form")
    k = size - 2
    a = m[size - 1, 0]
    if any(m[size - 1, j] != a for j in range(size)):
        raise ParameterExtractionFailed("bottom row not constant")
    v = tuple(m[1 + i, 0] - a for i in range(k))
    b = Matrix.from_rows([[m[1 + i, 1 + j] - v[i] - a for j in range(k)]
                          for i in range(k)])
    brow_sums = b.row_sums()
    for i in range(k):
        if m[1 + i, size - 1] != v[i] - brow_sums[i] + a:
            raise ParameterExtractionFailed("right column mismatch")
    sums = set(m.column_sums())
    if len(sums) != 1:
        raise ParameterExtractionFailed("column sums not constant")
    return BParams(sums.pop(), b, v, a)


def b_compose(left: BParams, right: BParams) -> BParams:
    """Multiply two B-form matrices exactly and re-extract the parameters,
    asserting the closure law (pp', BB', p'v + Bv', p'a)."""
    product = b_matrix(left) * b_matrix(right)
    got = b_extract(product)
    expected = BParams(
        left.p * right.p,
        left.b * right.b,
        vec_add(vec_scale(right.p, left.v), left.b.mul_vector(right.v)),
        right.p * left.a)
    if (got.p, got.b, got.v, got.a) != (expected.p, expected.b,
                                        expected.v, expected.a):
        raise ParameterExtractionFailed(
            f"closure law violated: got {got}, expected {expected}")
    return got
