"""Construction of simultaneous equal-row-and-column-sum realizations.

The staged construction for a target index lambda, eigenvector normalization
to the all-ones row, embroidery with zero rows or columns, the finishing
simultaneous conjugations, the digit-moving polynomial algorithm, and the
commuting-family route seeded by an equal-sums primitive matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (CongruenceViolated, DimensionMismatch, GcdViolated,
                     K1Unnormalizable, LambdaTooSmall, NoValidT, NotEqualSums,
                     NotPrimitive, PositivityFailed, RankDeficient, SchemaError)
from .exact import (Matrix, UnimodularTransform, content, map_content1_row,
                    _euclid_to_first)
from .perron import check_equal_sums_criterion, is_primitive
from .realization import RealizationSeq
from .supernatural import FactorSequence


@dataclass(frozen=True)
class EcrsProblem:
    """Target data for an ECRS realization: rank k of the complement, the
    index lambda = |tau(G)/tau(H)|, the trace row remainder rho with
    gcd(content(rho), lambda) = 1, and the factor prefix with every
    p = 1 (mod lambda).  Optional extras select the p-divisible routes: a
    prime power q = 1 (mod lambda) for the embroidered route, or a seed
    matrix (primitive, equal row and column sums) for the commuting route."""

    k: int
    lam: int
    rho: tuple[int, ...]
    p_seq: FactorSequence
    q: int | None = None
    seed_matrix: Matrix | None = None

    def __post_init__(self):
        if self.k < 1:
            raise SchemaError("k must be >= 1")
        if self.lam < 1:
            raise SchemaError("lambda must be >= 1")
        if len(self.rho) != self.k:
            raise DimensionMismatch("rho must have length k")

    @classmethod
    def from_json(cls, obj: dict) -> "EcrsProblem":
        try:
            k = int(obj["k"])
            lam = int(obj["lambda"])
            rho = tuple(int(x) for x in obj["rho"])
            p_seq = FactorSequence(tuple(int(p) for p in obj["p_seq"]))
            q = int(obj["q"]) if obj.get("q") is not None else None
            seed = obj.get("seed_matrix")
            seed_m = (Matrix.from_rows([[int(x) for x in row] for row in seed])
                      if seed is not None else None)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed ECRS problem: {exc}") from None
        return cls(k, lam, rho, p_seq, q, seed_m)

    def to_json(self) -> dict:
        out = {"k": self.k, "lambda": self.lam, "rho": list(self.rho),
               "p_seq": list(self.p_seq.factors)}
        if self.q is not None:
            out["q"] = self.q
        if self.seed_matrix is not None:
            out["seed_matrix"] = self.seed_matrix.to_rows()
        return out


# -- stage construction -----------------------------------------------------------


def _stage_matrix(p: int, v: Sequence[int]) -> Matrix:
    k = len(v)
    rows = [[p] + list(v)]
    for i in range(k):
        rows.append([0] + [1 if j == i else 0 for j in range(k)])
    return Matrix.from_rows(rows)


def build_index_stages(prob: EcrsProblem, scale: int = 1
                      ) -> tuple[list[Matrix], list[tuple[int, ...]],
                                 list[tuple[Fraction, ...]]]:
    """Stage matrices [[p, v_n], [0, I]] with v_n = rho (p - 1) / lambda,
    the correction rows y_n = rho (q_n - 1) / lambda, and the trace rows
    (lambda / q_n, rho) of the diagonal presentation.

    The congruence p = 1 (mod lambda) makes every v_n and y_n integral, and
    (lambda, rho) is a common left eigenvector of every stage matrix.  The
    optional scale multiplies each stage factor (the p-divisible route uses
    scale = q)."""
    lam, rho = prob.lam, prob.rho
    if math.gcd(content(rho), lam) != 1:
        raise GcdViolated(
            f"gcd(content(rho), lambda) = {math.gcd(content(rho), lam)} != 1")
    values = [scale * p for p in prob.p_seq.factors]
    for idx, p in enumerate(values, start=1):
        if (p - 1) % lam != 0:
            raise CongruenceViolated(
                f"stage factor {p} is not 1 mod lambda={lam}", stage=idx)
    mats = []
    for p in values:
        v = tuple(r * (p - 1) // lam for r in rho)
        mats.append(_stage_matrix(p, v))
    ys = [tuple([0] * prob.k)]
    q = 1
    trace_rows = [tuple([Fraction(lam)] + [Fraction(r) for r in rho])]
    for p in values:
        q *= p
        ys.append(tuple(r * (q - 1) // lam for r in rho))
        trace_rows.append(tuple([Fraction(lam, q)] + [Fraction(r) for r in rho]))
    return mats, ys, trace_rows


def normalize_to_ones(prob: EcrsProblem) -> UnimodularTransform:
    """A single conjugator T = [[1, v], [0, E]] sending every stage
    [[p, rho (p-1)/lambda], [0, I]] to [[p, ((p-1)/lambda) u], [0, I]] with
    u the all-ones row; the common left eigenvector becomes (lambda, u).

    Needs a row v with content(rho - lambda v) = 1.  For k >= 2 one always
    exists; for k = 1 it exists iff rho = +-1 (mod lambda)."""
    k, lam, rho = prob.k, prob.lam, prob.rho
    if math.gcd(content(rho), lam) != 1:
        raise GcdViolated("gcd(content(rho), lambda) != 1")
    ones = tuple([1] * k)
    if lam == 1:
        v = tuple(r - o for r, o in zip(rho, (1,) + (0,) * (k - 1)))
    elif k == 1:
        r0 = rho[0]
        if (r0 - 1) % lam == 0:
            v = ((r0 - 1) // lam,)
        elif (r0 + 1) % lam == 0:
            v = ((r0 + 1) // lam,)
        else:
            raise K1Unnormalizable(
                f"k=1 needs rho = +-1 (mod lambda); rho={r0}, lambda={lam}")
    else:
        ops, _ = _euclid_to_first(rho)
        u_red = UnimodularTransform(k, tuple(ops))
        v = tuple(u_red.inverse().matrix.row(1))   # e_2 pulled back
    sigma = tuple(r - lam * x for r, x in zip(rho, v))
    e = map_content1_row(sigma, ones)
    # T = diag(1, E) * [[1, v], [0, I]]
    ops = list(e.embed(k + 1, 1).ops)
    for j, vj in enumerate(v):
        if vj:
            ops.append(("add", 0, 1 + j, vj))
    return UnimodularTransform(k + 1, tuple(ops))


# -- embroidery (zero rows / zero columns) ------------------------------------------


def embroider_rows(m: Matrix, x: Matrix | None) -> Matrix:
    """Border with zero columns on the right and the block X below:
    [[M, 0], [X, 0]].  Rank is preserved, and a left eigenvector (a, b)
    of M extends to (a, b, 0)."""
    if x is None or x.rows == 0:
        return m
    if not m.is_square:
        raise DimensionMismatch("embroidery needs a square matrix")
    if m.rank() != m.rows:
        raise RankDeficient("embroidery needs a full-rank matrix")
    if x.cols != m.cols:
        raise DimensionMismatch("X must have as many columns as M")
    s, extra = m.rows, x.rows
    size = s + extra
    rows = [list(m.row(i)) + [0] * extra for i in range(s)]
    rows += [list(x.row(i)) + [0] * extra for i in range(extra)]
    return Matrix.from_rows(rows)


def embroider_cols(m: Matrix, y: Matrix | None, z: Matrix | None) -> Matrix:
    """Border with zero rows at the bottom and the block [Z; Y] at the
    right: [[M, Z over Y], [0, 0]]."""
    if not m.is_square:
        raise DimensionMismatch("embroidery needs a square matrix")
    if m.rank() != m.rows:
        raise RankDeficient("embroidery needs a full-rank matrix")
    blocks = [b for b in (z, y) if b is not None and b.rows > 0]
    if not blocks:
        return m
    extra = blocks[0].cols
    if any(b.cols != extra for b in blocks):
        raise DimensionMismatch("border blocks must share a width")
    if sum(b.rows for b in blocks) != m.rows:
        raise DimensionMismatch("border blocks must cover the rows of M")
    s = m.rows
    size = s + extra
    border_rows = [row for b in blocks for row in b.to_rows()]
    rows = [list(m.row(i)) + list(border_rows[i]) for i in range(s)]
    rows += [[0] * size for _ in range(extra)]
    return Matrix.from_rows(rows)


def _cyclic_targets(k: int, count: int) -> list[int]:
    """Column indices 1..k assigned cyclically to the bordered block; for
    count <= k this is the plain shift-by-k of the identity block."""
    return [1 + (j % k) for j in range(count)]


def embroidery_block(k: int, lam: int) -> Matrix | None:
    """The X block for the finite route: one row per extra coordinate, a
    single 1 in the cyclically assigned interior column."""
    extra = lam - k - 1
    if extra <= 0:
        return None
    rows = []
    for r, target in enumerate(_cyclic_targets(k, extra)):
        row = [0] * (k + 1)
        row[target] = 1
        rows.append(row)
    return Matrix.from_rows(rows)


# -- the finishing conjugations -----------------------------------------------------


def _lower_ones(size: int) -> Matrix:
    rows = [[1 if (j == i or j == 0) else 0 for j in range(size)]
            for i in range(size)]
    return Matrix.from_rows(rows)


def _p_divisible_shift(size: int, k: int, lam: int, q: int) -> UnimodularTransform:
    """Column operations sending the eigenvector tail (q, ..., q, lam, ..., lam)
    to all ones with small multipliers: each interior entry drops by
    (q-1)/lam times a border entry, then each border entry drops by lam - 1
    times the first interior entry.  Small multipliers keep the conjugated
    stages nonnegative at realistic stage values."""
    s0 = (q - 1) // lam
    ops: list[tuple] = []
    first_border = 1 + k          # whole-matrix coordinates; column 0 stays put
    for i in range(1, 1 + k):
        if s0:
            ops.append(("add", first_border, i, -s0))
    if lam > 1:
        for b in range(first_border, size):
            ops.append(("add", 1, b, -(lam - 1)))
    return UnimodularTransform(size, tuple(ops))


def ecrs_finisher(mats: Sequence[Matrix], case: str, *, k: int, lam: int,
                  q: int = 1) -> RealizationSeq:
    """Simultaneous conjugation turning the bordered stage matrices into
    primitive matrices with all row sums and all column sums equal.

    Cases: "direct" (lambda = k+1, nothing but the final add-first-row /
    subtract-columns step), "embroidered" (finite route, interior columns
    first copied onto the border), "p-divisible" (the border carries the
    small prime blocks; the content-one tail of the common left eigenvector
    is mapped to all ones, guarded by the t = sk window).

    Precondition: the matrices share the case's left eigenvector V and the
    right eigenvector e_0 with V e_0 = size."""
    if not mats:
        raise DimensionMismatch("no stage matrices")
    size = mats[0].rows
    ones = tuple([1] * k)
    if case == "direct":
        v_evec = (lam,) + ones
        p_shift = Matrix.identity(size)
    elif case == "embroidered":
        v_evec = (lam,) + ones + tuple([0] * (lam - k - 1))
        shift = [[0] * size for _ in range(size)]
        for i in range(size):
            shift[i][i] = 1
        for j, target in enumerate(_cyclic_targets(k, lam - k - 1)):
            shift[target][k + 1 + j] = 1
        p_shift = Matrix.from_rows(shift)
    elif case == "p-divisible":
        v_evec = (lam * q,) + tuple(q * x for x in ones) \
            + tuple([lam] * (size - k - 1))
        # Guard: the finishing window q/lam <= t/k <= (q p_min - 1)/lam must
        # contain a multiple t = sk.
        p_min = min(m[0, 0] // q for m in mats)
        s_lo = -(-q // lam)
        s_hi = (q * p_min - 1) // lam
        if s_lo > s_hi:
            raise NoValidT(
                f"empty window for t = sk: q/lam={q}/{lam}, qp-1={q * p_min - 1}")
        p_shift = _p_divisible_shift(size, k, lam, q).matrix
    else:
        raise SchemaError(f"unknown finisher case {case!r}")

    e0 = tuple([1] + [0] * (size - 1))
    if sum(a * b for a, b in zip(v_evec, e0)) != size:
        raise SchemaError("eigenvector inner product must equal the size")
    for idx, m in enumerate(mats, start=1):
        if m.rows != size or m.cols != size:
            raise DimensionMismatch("sizes must agree", stage=idx)
        p = m[0, 0]
        if m.vector_mul(v_evec) != tuple(p * x for x in v_evec):
            raise SchemaError("stage lost the common left eigenvector",
                              stage=idx)
        if m.mul_vector(e0) != tuple(p * x for x in e0):
            raise SchemaError("stage lost the right eigenvector e_0",
                              stage=idx)

    lower = _lower_ones(size)
    lower_inv = lower.inverse()
    shift_inv = p_shift.inverse()
    out = []
    values = []
    for idx, m in enumerate(mats, start=1):
        g = lower * (shift_inv * m * p_shift) * lower_inv
        if not g.is_integral():
            raise AssertionError("conjugation left the integers")
        g = Matrix(size, size, [int(x) for x in
                                (g[i, j] for i in range(size)
                                 for j in range(size))])
        bad = next(((i, j) for i in range(size) for j in range(size)
                    if g[i, j] < 0), None)
        if bad is not None:
            raise PositivityFailed(
                f"entry {bad} = {g[bad[0], bad[1]]} negative", stage=idx)
        if not is_primitive(g):
            raise NotPrimitive("finished stage not primitive", stage=idx)
        p = m[0, 0]
        if set(g.row_sums()) != {p} or set(g.column_sums()) != {p}:
            raise AssertionError("finisher failed to equalize sums")
        report = check_equal_sums_criterion(g)
        if report.inner_product != size or not report.sums_equal:
            raise AssertionError("equal-sums criterion failed on output")
        out.append(g)
        values.append(p)
    markers = tuple([tuple([1] * size)] * (len(out) + 1))
    return RealizationSeq(tuple(out), tuple(values), markers,
                          {"ecs": True, "ers": True, "ecrs": True},
                          {"pipeline": "ecrs", "case": case, "k": k,
                           "lambda": lam, "q": q})


# -- the polynomial algorithm and the commuting route ---------------------------------


@dataclass(frozen=True)
class PolyNat:
    """Polynomial with nonnegative integer coefficients, ascending degree."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.coefficients):
            raise SchemaError("coefficients must be nonnegative")

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def at_matrix(self, a: Matrix) -> Matrix:
        acc = Matrix.zeros(a.rows, a.cols)
        ident = Matrix.identity(a.rows)
        for c in reversed(self.coefficients):
            acc = a * acc + ident.scale(c)
        return acc


def poly_for(m: int, l: int) -> PolyNat:
    """f with nonnegative integer coefficients, f(m) = l and f(-1) in {+-1}.

    Starts from the m-adic digit expansion of l and moves digits: lowering a
    digit of index i and adding m to index i-1 keeps f(m) and shifts f(-1)
    by -(m+1) for even i, +(m+1) for odd i.  Since every integer polynomial
    has f(m) = f(-1) (mod m+1), the walk lands exactly on the target sign,
    which also forces the precondition l = +-1 (mod m+1)."""
    if m <= 1:
        raise SchemaError("m must exceed 1")
    if l < 1:
        raise SchemaError("l must be positive")
    rem = l % (m + 1)
    if rem not in (1, m):
        raise CongruenceViolated(
            f"l = {l} is not +-1 (mod m+1 = {m + 1})")
    digits: list[int] = []
    n = l
    while n:
        digits.append(n % m)
        n //= m
    if not digits:
        digits = [0]
    val = sum(c * (-1) ** i for i, c in enumerate(digits))
    while val not in (1, -1):
        if val > 1:
            i = next((i for i in range(2, len(digits), 2) if digits[i] > 0),
                     None)
            if i is None:
                raise AssertionError("no even digit to move")
            digits[i] -= 1
            digits[i - 1] += m
            val -= m + 1
        else:
            i = next((i for i in range(1, len(digits), 2) if digits[i] > 0),
                     None)
            if i is None:
                raise AssertionError("no odd digit to move")
            digits[i] -= 1
            digits[i - 1] += m
            val += m + 1
    while len(digits) > 1 and digits[-1] == 0:
        digits.pop()
    f = PolyNat(tuple(digits))
    assert f(m) == l and f(-1) == val
    return f


def commuting_family(a: Matrix, p_seq: Sequence[int]) -> RealizationSeq:
    """Stages A_n = A f_n(A) for a primitive seed with equal row and column
    sums q: all stages commute, keep 1 and 1^T as Perron eigenvectors, and
    have sums q p_n.  Every p_n must be +-1 (mod q+1)."""
    if not a.is_square:
        raise DimensionMismatch("seed must be square")
    if not a.is_nonnegative():
        raise NotEqualSums("seed must be nonnegative")
    rows, cols = set(a.row_sums()), set(a.column_sums())
    if len(rows) != 1 or rows != cols:
        raise NotEqualSums(
            f"seed must have equal row and column sums, got rows {sorted(rows)}"
            f" cols {sorted(cols)}")
    if not is_primitive(a):
        raise NotPrimitive("seed must be primitive")
    q = rows.pop()
    factors = list(p_seq.factors if isinstance(p_seq, FactorSequence) else p_seq)
    if not factors or any(p < 1 for p in factors):
        raise SchemaError("stage factors must be positive")
    size = a.rows
    ones = tuple([1] * size)
    mats = []
    values = []
    for idx, p in enumerate(factors, start=1):
        try:
            f = poly_for(q, p)
        except CongruenceViolated as exc:
            raise CongruenceViolated(str(exc), stage=idx) from None
        m = a * f.at_matrix(a)
        if not m.is_nonnegative():
            raise AssertionError("nonnegative coefficients lost positivity")
        if m.mul_vector(ones) != tuple(q * p * x for x in ones) \
                or m.vector_mul(ones) != tuple(q * p * x for x in ones):
            raise AssertionError("Perron eigenvectors not preserved")
        mats.append(m)
        values.append(q * p)
    markers = tuple([ones] * (len(mats) + 1))
    return RealizationSeq(tuple(mats), tuple(values), markers,
                          {"ecs": True, "ers": True, "ecrs": True},
                          {"pipeline": "ecrs", "case": "commuting", "q": q})


# -- the pipeline --------------------------------------------------------------


def ecrs_pipeline(prob: EcrsProblem) -> RealizationSeq:
    """Dispatch on the problem data.

    Without an infinite prime: lambda >= k+1 is necessary and sufficient;
    the stages are built, normalized to the all-ones row, embroidered when
    lambda exceeds k+1, and finished; output size is exactly lambda.  With a
    seed matrix (split case, lambda = 1): the commuting-family route.  With
    a prime power q: the p-divisible embroidery of size lambda q."""
    if prob.seed_matrix is not None:
        if prob.lam != 1:
            raise SchemaError("the seed-matrix route is the split case lambda=1")
        return commuting_family(prob.seed_matrix, prob.p_seq)

    if prob.q is not None:
        return _p_divisible_route(prob)

    if prob.lam < prob.k + 1:
        raise LambdaTooSmall(
            f"lambda = {prob.lam} below rank G = {prob.k + 1}: no ECRS "
            "realization exists when the value group has no infinite prime")
    stages, _, _ = build_index_stages(prob)
    conj = normalize_to_ones(prob)
    normalized = _apply_normalizer(stages, conj, prob)
    if prob.lam == prob.k + 1:
        return ecrs_finisher(normalized, "direct", k=prob.k, lam=prob.lam)
    x = embroidery_block(prob.k, prob.lam)
    bordered = [embroider_rows(m, x) for m in normalized]
    return ecrs_finisher(bordered, "embroidered", k=prob.k, lam=prob.lam)


def _apply_normalizer(stages: Sequence[Matrix], conj: UnimodularTransform,
                      prob: EcrsProblem) -> list[Matrix]:
    t = conj.matrix
    t_inv = conj.inverse().matrix
    out = []
    for idx, m in enumerate(stages, start=1):
        g = t * m * t_inv
        p = m[0, 0]
        c = (p - 1) // prob.lam
        expected = _stage_matrix(p, tuple([c] * prob.k))
        if g != expected:
            raise AssertionError(
                f"normalization failed at stage {idx}: got {g.to_rows()}")
        out.append(g)
    return out


def _p_divisible_route(prob: EcrsProblem) -> RealizationSeq:
    q, lam, k = prob.q, prob.lam, prob.k
    if q is None or q <= 1:
        raise SchemaError("q must be a prime power exceeding 1")
    if (q - 1) % lam != 0:
        raise CongruenceViolated(f"q = {q} is not 1 mod lambda = {lam}")
    size = lam * q
    if size < k + 2:
        raise NoValidT(
            f"lambda q = {size} leaves no room to border a (k+1)-block, k={k}")
    stages, _, _ = build_index_stages(prob, scale=q)
    conj = normalize_to_ones(prob)
    normalized = _apply_normalizer(stages, conj, prob)
    extra = size - k - 1
    bordered = []
    for m, p in zip(normalized, prob.p_seq.factors):
        z = Matrix.from_rows([[p] * extra])        # top border p * ones
        y = Matrix.zeros(k, extra) if k else None
        bordered.append(embroider_cols(m, y, z))
    return ecrs_finisher(bordered, "p-divisible", k=k, lam=lam, q=q)
