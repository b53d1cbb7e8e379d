import random
from fractions import Fraction

import pytest

from dimgroup.errors import (BadCutPoints, HorizonExhausted, Infeasible,
                             ParameterExtractionFailed, PTooSmall, SchemaError)
from dimgroup.exact import Matrix, is_unimodular
from dimgroup.ecs import (AParams, BParams, ExtensionData, Stage, b_compose,
                          b_extract, b_matrix, choose_a_params, ecs_pipeline,
                          eps_basis, general_ecs_matrix, kernel_vector,
                          normalization_witnesses, normalize_extension,
                          reduce_vector, select_convergent_prefix,
                          split_ecs_matrix, telescope_extension)
from dimgroup.perron import is_primitive


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def split_charpoly(k, p):
    """x (x-1)^k (x-p), descending coefficients."""
    poly = [1, 0]                       # x
    for _ in range(k):
        poly = _poly_mul(poly, [1, -1])
    return tuple(_poly_mul(poly, [1, -p]))


def test_split_examples():
    assert split_ecs_matrix(1, 5).to_rows() == [[3, 4, 2], [1, 1, 1], [1, 0, 2]]
    assert split_ecs_matrix(2, 10).to_rows() == [
        [7, 9, 9, 3], [1, 1, 0, 2], [1, 0, 1, 2], [1, 0, 0, 3]]
    with pytest.raises(PTooSmall):
        split_ecs_matrix(1, 4)


def test_split_structure():
    for k in (1, 2, 3):
        p = (k + 1) ** 2 + 3
        m = split_ecs_matrix(k, p)
        assert set(m.column_sums()) == {p}
        assert m.charpoly() == split_charpoly(k, p)
        assert m.mul_vector(kernel_vector(k)) == tuple([0] * (k + 2))
        assert m.rank() == k + 1
        assert is_primitive(m)


def test_eps_basis():
    basis = eps_basis(3)
    assert basis[0] == (0, 0, 0)
    assert basis[2] == (0, 1, 0)
    assert basis[4] == (-1, -1, -1)
    total = tuple(sum(col) for col in zip(*basis[1:]))
    assert total == (0, 0, 0)


def test_general_matrix_worked_example():
    m = general_ecs_matrix(7, (1,), Matrix.from_rows([[1]]),
                           AParams.uniform(1, 1))
    assert m.to_rows() == [[4, 3, 5], [2, 3, 1], [1, 1, 1]]
    assert set(m.column_sums()) == {7}


def test_general_matrix_kernel_and_eigenrow():
    rng = random.Random(3)
    for _ in range(50):
        k = rng.randint(1, 4)
        p = rng.randint(40, 200)
        v = tuple(rng.randint(-3, 3) for _ in range(k))
        while True:
            b = Matrix.from_rows([[rng.randint(-2, 2) for _ in range(k)]
                                  for _ in range(k)])
            if b.det() != 0:
                break
        a = AParams.uniform(k, rng.randint(1, 4))
        m = general_ecs_matrix(p, v, b, a)
        assert set(m.column_sums()) == {p}
        assert m.mul_vector(kernel_vector(k)) == tuple([0] * (k + 2))
        assert m.rank() == k + 1


def test_left_eigenrow_for_eigenvalue_one():
    # B = I case: rows (0, u, -sum(u)) with u.v = 0 fix the matrix on the left
    v = (1, 2, 0)
    u = (2, -1, 5)          # u.v = 0
    m = general_ecs_matrix(60, v, Matrix.identity(3), AParams.uniform(3, 2))
    row = (0,) + u + (-sum(u),)
    assert m.vector_mul(row) == row


def test_aparams_constraint():
    with pytest.raises(SchemaError):
        AParams((1, 1, 2))      # 1 + 2 != 2 * 1
    AParams((2, 1, 3))          # 1 + 3 = 2 * 2 is fine


def test_choose_a_params():
    assert choose_a_params(50, (0, 0), Matrix.identity(2)).values == (1,) * 4
    assert choose_a_params(100, (-3, 1), Matrix.identity(2)).values == (4,) * 4
    with pytest.raises(Infeasible):
        choose_a_params(3, (5, 5), Matrix.identity(2))


def test_reduce_vector_examples():
    e, w = reduce_vector((Fraction(0), Fraction(0), Fraction(0)))
    assert e.matrix == Matrix.identity(3) and w == (0, 0, 0)

    v = (Fraction(7, 10), Fraction(1, 2))
    e, w = reduce_vector(v)
    rem = tuple(a - b for a, b in zip(e.matrix.mul_vector(v), w))
    assert rem == (0, Fraction(1, 10))

    v = (Fraction(3, 2), Fraction(0))
    e, w = reduce_vector(v)
    assert w == (1, 0)
    rem = tuple(a - b for a, b in zip(e.matrix.mul_vector(v), w))
    assert rem == (Fraction(1, 2), 0)


def test_reduce_vector_random():
    rng = random.Random(6)
    for _ in range(200):
        k = rng.randint(1, 5)
        v = tuple(Fraction(rng.randint(0, 300), rng.randint(1, 100))
                  for _ in range(k))
        e, w = reduce_vector(v)
        assert is_unimodular(e.matrix)
        rem = tuple(a - b for a, b in zip(e.matrix.mul_vector(v), w))
        assert all(x >= 0 for x in rem)
        assert sum(rem) < 1


def test_normalize_examples():
    data, us = normalize_extension(
        ExtensionData(1, (Stage(5, (-3,), Matrix.identity(1)),)))
    assert data.stages[0].v == (2,) and us == [(-1,)]

    data, us = normalize_extension(
        ExtensionData(2, (Stage(7, (9, -1), Matrix.identity(2)),)))
    assert data.stages[0].v == (2, 6) and us == [(1, -1)]

    already = ExtensionData(1, (Stage(5, (2,), Matrix.identity(1)),))
    data, us = normalize_extension(already)
    assert data == already and us == [(0,)]


def test_normalize_commuting_squares():
    rng = random.Random(8)
    for _ in range(30):
        k = rng.randint(1, 3)
        stages = []
        for _ in range(rng.randint(1, 4)):
            while True:
                b = Matrix.from_rows([[rng.randint(-2, 2) for _ in range(k)]
                                      for _ in range(k)])
                if b.det() != 0:
                    break
            stages.append(Stage(rng.randint(2, 30),
                                tuple(rng.randint(-20, 20) for _ in range(k)),
                                b))
        data = ExtensionData(k, tuple(stages))
        norm, us = normalize_extension(data)
        fs = normalization_witnesses(us, k)
        for i, (orig, new) in enumerate(zip(data.stages, norm.stages)):
            assert all(0 <= x < orig.p for x in new.v)
            assert fs[i + 1] * orig.block_matrix() == new.block_matrix() * fs[i]


def test_telescope_examples():
    data = ExtensionData(1, (Stage(5, (1,), Matrix.identity(1)),
                             Stage(7, (2,), Matrix.identity(1))))
    same = telescope_extension(data, [0, 1])
    assert same == data
    merged = telescope_extension(data, [0])
    # oracle: the exact block-matrix product of the two stages
    prod = data.stages[1].block_matrix() * data.stages[0].block_matrix()
    assert merged.stages[0].block_matrix() == prod
    assert merged.stages[0].p == 35 and merged.stages[0].v == (11,)
    with pytest.raises(BadCutPoints):
        telescope_extension(data, [0, 0])
    with pytest.raises(BadCutPoints):
        telescope_extension(data, [2])


def test_telescope_associativity():
    rng = random.Random(11)
    for _ in range(20):
        k = rng.randint(1, 3)
        stages = []
        for _ in range(3):
            while True:
                b = Matrix.from_rows([[rng.randint(-2, 2) for _ in range(k)]
                                      for _ in range(k)])
                if b.det() != 0:
                    break
            stages.append(Stage(rng.randint(2, 9),
                                tuple(rng.randint(-4, 4) for _ in range(k)), b))
        data = ExtensionData(k, tuple(stages))
        all_at_once = telescope_extension(data, [0])
        two_step = telescope_extension(telescope_extension(data, [0, 2]), [0])
        assert all_at_once == two_step
        oracle = (stages[2].block_matrix() * stages[1].block_matrix()
                  * stages[0].block_matrix())
        assert all_at_once.stages[0].block_matrix() == oracle


def test_select_convergent_prefix():
    stationary = ExtensionData(1, tuple(Stage(4, (1,), Matrix.identity(1))
                                        for _ in range(5)))
    cuts = select_convergent_prefix(stationary, Fraction(0))
    assert cuts == [0, 1, 2, 3, 4]    # exact equality always passes

    doubling = ExtensionData(1, tuple(
        Stage(2 ** (i + 3), (1,), Matrix.identity(1)) for i in range(6)))
    cuts = select_convergent_prefix(doubling, Fraction(1, 50))
    tele = telescope_extension(doubling, cuts)
    ratios = [Fraction(st.v[0], st.p) for st in tele.stages]
    assert all(abs(a - b) < Fraction(1, 50)
               for a, b in zip(ratios, ratios[1:]))

    nonstationary = ExtensionData(1, (Stage(7, (1,), Matrix.identity(1)),
                                      Stage(11, (5,), Matrix.identity(1))))
    with pytest.raises(HorizonExhausted):
        select_convergent_prefix(nonstationary, Fraction(0))


def test_ecs_pipeline_split_data():
    data = ExtensionData(1, (Stage(5, (0,), Matrix.identity(1)),
                             Stage(7, (0,), Matrix.identity(1)),
                             Stage(11, (0,), Matrix.identity(1))))
    seq = ecs_pipeline(data)
    assert seq.stage_values == (5, 7, 11)
    z = kernel_vector(1)
    for m, p in zip(seq.matrices, seq.stage_values):
        assert m.is_nonnegative()
        assert set(m.column_sums()) == {p}
        assert m.mul_vector(z) == (0, 0, 0)
        assert m.rank() == 2
        assert is_primitive(m)


def test_ecs_pipeline_random_normalized():
    rng = random.Random(19)
    for _ in range(10):
        k = rng.randint(1, 2)
        stages = []
        ratio_num = rng.randint(0, 9)
        for _ in range(3):
            p = rng.choice([101, 211, 401])
            v0 = ratio_num * p // 100
            stages.append(Stage(p, tuple(v0 for _ in range(k)),
                                Matrix.identity(k)))
        data = ExtensionData(k, tuple(stages))
        seq = ecs_pipeline(data, Fraction(1, 20))
        z = kernel_vector(k)
        for m, p in zip(seq.matrices, seq.stage_values):
            assert m.is_nonnegative()
            assert set(m.column_sums()) == {p}
            assert m.mul_vector(z) == tuple([0] * (k + 2))
            assert m.rank() == k + 1
            assert is_primitive(m)


def test_ecs_pipeline_outputs_have_designed_perron():
    from dimgroup.perron import integer_perron
    data = ExtensionData(1, (Stage(5, (0,), Matrix.identity(1)),
                             Stage(7, (0,), Matrix.identity(1)),
                             Stage(11, (0,), Matrix.identity(1))))
    seq = ecs_pipeline(data)
    for m, p in zip(seq.matrices, seq.stage_values):
        assert integer_perron(m).eigenvalue == p


def test_ecs_pipeline_infeasible_small_p():
    data = ExtensionData(2, tuple(Stage(2, (0, 0), Matrix.identity(2))
                                  for _ in range(2)))
    with pytest.raises((Infeasible, HorizonExhausted)):
        ecs_pipeline(data)


def test_b_algebra_worked_example():
    left = BParams(7, Matrix.identity(1), (1,), 1)
    right = BParams(5, Matrix.identity(1), (2,), 1)
    assert b_matrix(left).to_rows() == [[4, 3, 5], [2, 3, 1], [1, 1, 1]]
    assert b_matrix(right).to_rows() == [[1, 0, 2], [3, 4, 2], [1, 1, 1]]
    product = b_matrix(left) * b_matrix(right)
    assert product.to_rows() == [[18, 17, 19], [12, 13, 11], [5, 5, 5]]
    composed = b_compose(left, right)
    assert (composed.p, composed.v, composed.a) == (35, (7,), 5)
    assert composed.b == Matrix.identity(1)


def test_b_algebra_v_zero():
    left = BParams(9, Matrix.identity(2), (0, 0), 2)
    right = BParams(11, Matrix.identity(2), (0, 0), 3)
    composed = b_compose(left, right)
    assert (composed.p, composed.v, composed.a) == (99, (0, 0), 22)


def test_b_algebra_random_closure_and_associativity():
    rng = random.Random(13)
    for _ in range(60):
        k = rng.randint(1, 4)
        params = []
        for _ in range(3):
            while True:
                b = Matrix.from_rows([[rng.randint(-2, 2) for _ in range(k)]
                                      for _ in range(k)])
                if b.det() != 0:
                    break
            params.append(BParams(rng.randint(2, 50), b,
                                  tuple(rng.randint(-5, 5) for _ in range(k)),
                                  rng.randint(1, 5)))
        x, y, z = params
        xy = b_compose(x, y)
        yz = b_compose(y, z)
        assert b_matrix(b_compose(xy, z)) == b_matrix(b_compose(x, yz))


def test_b_extract_rejects_non_b_form():
    with pytest.raises(ParameterExtractionFailed):
        b_extract(Matrix.from_rows([[1, 2, 3], [4, 5, 6], [7, 8, 8]]))
