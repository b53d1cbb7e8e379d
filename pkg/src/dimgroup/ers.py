"""Construction of equal-row-sum realizations by transposing the bordered
ECS machinery, plus the canonical upper-triangular form utilities: lattice
rounding, the w-sequence matching a target trace row, and the restriction to
the kernel complement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (DimensionMismatch, Infeasible, KernelMismatch,
                     NotPrimitive, RegimeViolation, SchemaError, SingularB)
from .exact import (Matrix, colsum_norm, sup_norm, vec_add, vec_scale, vec_sub)
from .ecs import choose_a_params, general_ecs_matrix, kernel_vector
from .perron import is_primitive
from .realization import RealizationSeq


@dataclass(frozen=True)
class ErsStage:
    p: int
    u: tuple[int, ...]      # a row this time
    b: Matrix

    def __post_init__(self):
        if self.p <= 1:
            raise SchemaError(f"stage factor must exceed 1, got {self.p}")
        if not self.b.is_square or self.b.rows != len(self.u):
            raise DimensionMismatch("stage B must be k x k with u of length k")
        if self.b.det() == 0:
            raise SchemaError("stage B must have nonzero determinant")

    def block_matrix(self) -> Matrix:
        """Upper-triangular form [[p, u], [0, B]]."""
        k = len(self.u)
        rows = [[self.p] + list(self.u)]
        for i in range(k):
            rows.append([0] + list(self.b.row(i)))
        return Matrix.from_rows(rows)


@dataclass(frozen=True)
class ErsStageData:
    """Canonical upper-triangular presentation: stages (p, u, B) plus the
    target trace row (1, rho) with rho exact rationals.  The canonical form
    is the input format; no abstract-group bootstrapping is attempted."""

    k: int
    stages: tuple[ErsStage, ...]
    trace_row: tuple[Fraction, ...]    # rho^1, length k

    def __post_init__(self):
        if self.k < 1:
            raise SchemaError("k must be >= 1")
        if not self.stages:
            raise SchemaError("need at least one stage")
        for st in self.stages:
            if len(st.u) != self.k:
                raise DimensionMismatch("stage row length != k")
        if len(self.trace_row) != self.k:
            raise DimensionMismatch("trace row length != k")
        object.__setattr__(self, "trace_row",
                           tuple(Fraction(x) for x in self.trace_row))

    @classmethod
    def from_json(cls, obj: dict) -> "ErsStageData":
        try:
            k = int(obj["k"])
            stages = tuple(
                ErsStage(int(st["p"]),
                         tuple(int(x) for x in st["u"]),
                         Matrix.from_rows([[int(x) for x in row]
                                           for row in st["B"]]))
                for st in obj["stages"])
            rho = tuple(Fraction(int(n), int(d)) for n, d in obj["trace_row"])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"malformed ERS stage data: {exc}") from None
        return cls(k, stages, rho)

    def to_json(self) -> dict:
        return {"k": self.k,
                "stages": [{"p": st.p, "u": list(st.u), "B": st.b.to_rows()}
                           for st in self.stages],
                "trace_row": [[x.numerator, x.denominator]
                              for x in self.trace_row]}


# -- verification ---------------------------------------------------------------


@dataclass(frozen=True)
class ErsVerifyReport:
    ok: bool
    stage_row_sums: tuple[tuple[int, ...], ...]
    stage_values: tuple[int | None, ...]   # per-stage row sum when constant
    marker_chain_ok: bool
    some_p_exceeds_one: bool
    failures: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "stage_row_sums": [[str(x) for x in sums] for sums in self.stage_row_sums],
            "stage_values": [None if p is None else str(p) for p in self.stage_values],
            "marker_chain_ok": self.marker_chain_ok,
            "some_p_exceeds_one": self.some_p_exceeds_one,
            "failures": list(self.failures),
        }


def verify_ers(seq: RealizationSeq) -> ErsVerifyReport:
    """Recompute the ERS facts from the matrices alone: nonnegativity,
    constant row sums per stage, the marker chain, and (finite proxy for the
    tail condition) at least one stage value above 1."""
    failures = []
    all_sums = []
    values: list[int | None] = []
    for idx, m in enumerate(seq.matrices, start=1):
        if not m.is_nonnegative():
            failures.append(f"stage {idx}: negative entry")
        sums = m.row_sums()
        all_sums.append(sums)
        if len(set(sums)) == 1:
            values.append(sums[0])
        else:
            values.append(None)
            failures.append(f"stage {idx}: unequal row sums {sums}")
    marker_ok = seq.marker_chain_ok()
    if not marker_ok:
        failures.append("marker chain broken")
    some_p = any(p is not None and p > 1 for p in values)
    if not some_p:
        failures.append("no stage value exceeds 1 in the prefix")
    return ErsVerifyReport(not failures, tuple(all_sums), tuple(values),
                           marker_ok, some_p, tuple(failures))


# -- lattice rounding and the w-sequence -------------------------------------------


def nearest_int(x: Fraction) -> int:
    """Nearest integer, ties rounded toward zero (fixed for determinism)."""
    x = Fraction(x)
    floor = x.numerator // x.denominator
    frac = x - floor
    if frac > Fraction(1, 2):
        return floor + 1
    if frac < Fraction(1, 2):
        return floor
    return floor if x > 0 else floor + 1


def reduce_mod_rowlattice(z: Sequence[int], b: Matrix) -> tuple[int, ...]:
    """y with ||z - yB||_inf < |det B|, via exact rational arithmetic.

    Nearest-integer rounding of z B^{-1} is tried first; when the rounded
    remainder is not below |det B| (possible once the column sums of B beat
    its determinant), the witness falls back to reducing z entrywise mod
    |det B| through the adjugate, which meets the bound unconditionally
    because |det B| Z^{1 x k} lies inside the row lattice of B."""
    det = b.det()
    if det == 0:
        raise SingularB("row-lattice reduction needs det B != 0")
    if len(z) != b.rows:
        raise DimensionMismatch("row length mismatch")
    d = abs(det)
    b_inv = b.inverse()
    exact = b_inv.vector_mul(tuple(Fraction(x) for x in z))
    y = tuple(nearest_int(x) for x in exact)
    if sup_norm(vec_sub(z, b.vector_mul(y))) < d:
        return y
    floors = tuple(x // d for x in z)                       # z - d*floors in [0, d)
    scaled_inv = b_inv.scale(d)                             # +-adjugate, integral
    y = tuple(int(x) for x in scaled_inv.vector_mul(floors))
    rem = vec_sub(z, b.vector_mul(y))
    assert sup_norm(rem) < d
    return y


def _check_regime(data: ErsStageData, horizon: int, strict: bool) -> list[ErsStage]:
    stages = list(data.stages[:min(horizon, len(data.stages))])
    s = data.k + 1
    prev_p = 1
    for idx, st in enumerate(stages, start=1):
        if st.p < prev_p:
            raise RegimeViolation("stage values must be nondecreasing", stage=idx)
        prev_p = st.p
        norm_b = colsum_norm(st.b)
        if norm_b * norm_b > st.p:
            raise RegimeViolation(
                f"||B||^2 = {norm_b * norm_b} exceeds p = {st.p}", stage=idx)
        if sup_norm(st.u) >= st.p:
            raise RegimeViolation(
                f"||z|| = {sup_norm(st.u)} not below p = {st.p}", stage=idx)
        if strict:
            if norm_b ** (8 * s) * math.factorial(s) ** 16 > st.p:
                raise RegimeViolation(
                    "strict bound ||B|| <= p^(1/8s)/(s!)^(2/s) fails", stage=idx)
            if sup_norm(st.u) ** 4 > st.p:
                raise RegimeViolation(
                    "strict bound ||u|| <= p^(1/4) fails", stage=idx)
    return stages


@dataclass(frozen=True)
class WSequence:
    ys: tuple[tuple[int, ...], ...]        # y_1 .. y_{N+1}
    ws: tuple[tuple[int, ...], ...]        # w^1 .. w^N
    error_bound: Fraction                  # |S_N - rho|_inf is at most this


def partial_sum(ws: Sequence[Sequence[int]],
                stages: Sequence[ErsStage]) -> tuple[Fraction, ...]:
    """S_N = w^1/p_2 + w^2 B_1/(p_3 p_2) + ... for the given stages."""
    k = len(ws[0])
    total = tuple(Fraction(0) for _ in range(k))
    bprod = Matrix.identity(k)
    q = 1
    for w, st in zip(ws, stages):
        q *= st.p
        term = bprod.vector_mul(tuple(Fraction(x) for x in w))
        total = vec_add(total, vec_scale(Fraction(1, q), term))
        bprod = st.b * bprod    # B_n ... B_1 acts on the right of rows
    return total


def build_w_sequence(data: ErsStageData, horizon: int,
                     strict: bool = False) -> WSequence:
    """Integer rows w^i and correction rows y_i with exact commuting squares
    [[1, y_{n+1}], [0, I]] M_n(z) = M_n(w) [[1, y_n], [0, I]] such that the
    series of the w's reproduces the target trace row; the reported bound
    covers both the final rounding and a geometric tail allowance.
    """
    stages = _check_regime(data, horizon, strict)
    n_stages = len(stages)
    k = data.k
    rho = data.trace_row

    # cumulative products: q[i] = p_2 ... p_{i+1}, bprod[i] = B_i ... B_1
    q = [1]
    bprod = [Matrix.identity(k)]
    for st in stages:
        q.append(q[-1] * st.p)
        bprod.append(st.b * bprod[-1])

    z_inf = tuple(Fraction(0) for _ in range(k))
    for i, st in enumerate(stages, start=1):
        term = bprod[i - 1].vector_mul(tuple(Fraction(x) for x in st.u))
        z_inf = vec_add(z_inf, vec_scale(Fraction(1, q[i]), term))

    target = vec_sub(rho, z_inf)
    ys: list[tuple[int, ...]] = [tuple([0] * k)]
    for n in range(1, n_stages + 1):
        exact = bprod[n].inverse().vector_mul(vec_scale(q[n], target))
        ys.append(tuple(nearest_int(x) for x in exact))

    ws = []
    for n, st in enumerate(stages, start=1):
        w = vec_sub(vec_add(st.u, st.b.vector_mul(ys[n])),
                    vec_scale(st.p, ys[n - 1]))
        if n > 1:
            # w^1 absorbs the whole correction p_2 (rho - z-infinity); the
            # norm estimate only covers the later stages.  Rounding ties can
            # attain the limit, so the guaranteed form is non-strict.
            norm_limit = (Fraction(sup_norm(st.u))
                          + Fraction(st.p + colsum_norm(st.b), 2))
            if Fraction(sup_norm(w)) > norm_limit:
                raise AssertionError("w-norm estimate violated")
        ws.append(w)

    # y_{n} enters M_n as the top-right row of F_n = [[1, y_n],[0, I]]; the
    # commuting square is w^n = z_n + y_{n+1} B_n - p_{n+1} y_n, which is the
    # construction itself, so the squares hold identically.
    rounding = Fraction(colsum_norm(bprod[n_stages]), 2 * q[n_stages])
    delta = max((Fraction(sup_norm(st.u), st.p) for st in stages),
                default=Fraction(0))
    last_p = stages[-1].p
    tail = delta * Fraction(colsum_norm(bprod[n_stages]),
                            q[n_stages] * max(1, math.isqrt(last_p) - 1))
    return WSequence(tuple(ys), tuple(ws), rounding + tail)


# -- restriction to the kernel complement ------------------------------------------


def complement_basis(k: int) -> Matrix:
    """Z-basis of the orthogonal complement of the kernel vector inside
    Z^{k+2}, as columns: the all-ones column, then e_i - e_{k+1}."""
    cols = [[1] * (k + 2)]
    for i in range(1, k + 1):
        col = [0] * (k + 2)
        col[i] = 1
        col[k + 1] = -1
        cols.append(col)
    return Matrix.from_rows(cols).transpose()


def restrict_to_kernel_complement(matrices: Sequence[Matrix]) -> list[Matrix]:
    """Rewrite the transposes of shared-kernel ECS matrices in the basis of
    the kernel complement, recovering upper-triangular blocks
    [[p, v^T], [0, B^T]] for bordered-construction inputs."""
    if not matrices:
        raise DimensionMismatch("no matrices")
    size = matrices[0].rows
    k = size - 2
    if k < 1:
        raise DimensionMismatch("matrices must have size k+2 with k >= 1")
    z = kernel_vector(k)
    out = []
    for idx, a in enumerate(matrices, start=1):
        if not a.is_square or a.rows != size:
            raise DimensionMismatch("sizes must agree", stage=idx)
        if a.mul_vector(z) != tuple([0] * size):
            raise KernelMismatch(
                "matrix does not annihilate the kernel vector", stage=idx)
        c = a.transpose()
        basis_cols = complement_basis(k)
        image = c * basis_cols
        rows = []
        for j in range(k + 1):
            x = image.col(j)
            coords = [x[0]] + [x[i] - x[0] for i in range(1, k + 1)]
            if x[k + 1] != (k + 1) * x[0] - sum(x[1:k + 1]):
                raise KernelMismatch(
                    "image leaves the kernel complement", stage=idx)
            rows.append(coords)
        out.append(Matrix.from_rows(rows).transpose())
    return out


# -- the pipeline --------------------------------------------------------------


def ers_pipeline(data: ErsStageData, horizon: int,
                 strict: bool = False) -> RealizationSeq:
    """Match the target trace row with a w-sequence, assemble bordered ECS
    matrices from (p, w^T, B^T), transpose every stage, and verify: row sums
    equal the stage p, all-ones marker chain, primitivity, and the
    reconstructed trace row of the restricted blocks within the bound."""
    wseq = build_w_sequence(data, horizon, strict)
    stages = list(data.stages[:min(horizon, len(data.stages))])
    k = data.k
    z = kernel_vector(k)
    ecs_mats = []
    out_mats = []
    values = []
    for idx, (st, w) in enumerate(zip(stages, wseq.ws), start=1):
        bt = st.b.transpose()
        try:
            a = choose_a_params(st.p, w, bt)
        except Infeasible as exc:
            raise Infeasible(str(exc), stage=idx) from None
        ecs_m = general_ecs_matrix(st.p, w, bt, a)
        if set(ecs_m.column_sums()) != {st.p}:
            raise AssertionError("column sums broke ECS by-construction")
        if ecs_m.mul_vector(z) != tuple([0] * (k + 2)):
            raise AssertionError("kernel vector not annihilated")
        out = ecs_m.transpose()
        if not is_primitive(out):
            raise NotPrimitive("stage matrix not primitive", stage=idx)
        if set(out.row_sums()) != {st.p}:
            raise AssertionError("row sums broke ERS by-construction")
        ecs_mats.append(ecs_m)
        out_mats.append(out)
        values.append(st.p)

    # Reconstruct the trace row from the output itself and compare.
    blocks = restrict_to_kernel_complement(ecs_mats)
    rec_stages = []
    for blk, st in zip(blocks, stages):
        p = blk[0, 0]
        w_rec = tuple(blk[0, 1 + j] for j in range(k))
        b_rec = Matrix.from_rows([[blk[1 + i, 1 + j] for j in range(k)]
                                  for i in range(k)]).transpose()
        if p != st.p or b_rec != st.b:
            raise AssertionError("restricted block lost the stage data")
        rec_stages.append(ErsStage(p, w_rec, st.b))
    reconstructed = partial_sum([st.u for st in rec_stages], rec_stages)
    gap = sup_norm(vec_sub(reconstructed, data.trace_row))
    if gap > wseq.error_bound:
        raise AssertionError(
            f"trace row gap {gap} exceeds reported bound {wseq.error_bound}")

    size = k + 2
    ones = tuple([1] * size)
    markers = tuple([ones] * (len(out_mats) + 1))
    return RealizationSeq(tuple(out_mats), tuple(values), markers,
                          {"ers": True},
                          {"pipeline": "ers", "k": k, "horizon": horizon,
                           "trace_gap_bound": str(wseq.error_bound)})
