import random
from fractions import Fraction

from mbc.linalg import (
    NO_SOLUTION,
    NON_UNIQUE,
    UNIQUE,
    RatMatrix,
    in_column_span,
    kernel_basis,
    left_null_space,
    null_space,
    rank,
    solve_unique,
)

F = Fraction


def test_rank_examples():
    # the two singletons and the pair on two players span the plane
    two = RatMatrix.from_collection([0b01, 0b10, 0b11], 2)
    assert rank(two) == 2
    assert rank([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 3
    assert rank([[0, 0], [0, 0]]) == 0


def test_rank_equals_transpose_rank_random():
    rng = random.Random(11)
    for _ in range(150):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 5)
        m = [[F(rng.randint(-3, 3), rng.randint(1, 4)) for _ in range(cols)]
             for _ in range(rows)]
        assert rank(m) == rank([list(col) for col in zip(*m)])


def test_solve_unique_balanced_set_rejection():
    # four nonnegative vectors whose unique combination has a negative weight
    columns = [
        (1, 1, 1, 0),
        (1, 1, 0, 1),
        (1, 0, F(1, 10), 1),
        (0, F(1, 5), F(1, 10), F(1, 2)),
    ]
    matrix = RatMatrix.from_columns(columns)
    status, solution = solve_unique(matrix, [1, 1, 1, 1])
    assert status == UNIQUE
    assert solution == (F(25, 31), F(-4, 31), F(10, 31), F(50, 31))


def test_solve_unique_trivial_and_antipartition():
    status, solution = solve_unique(RatMatrix.from_columns([(1, 1, 1)]), [1, 1, 1])
    assert (status, solution) == (UNIQUE, (F(1),))
    pairs = RatMatrix.from_collection([0b011, 0b101, 0b110], 3)
    status, solution = solve_unique(pairs, [1, 1, 1])
    assert status == UNIQUE
    assert solution == (F(1, 2), F(1, 2), F(1, 2))


def test_solve_unique_three_way_contract():
    rng = random.Random(23)
    for _ in range(200):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 4)
        m = [[rng.randint(-2, 2) for _ in range(cols)] for _ in range(rows)]
        b = [rng.randint(-2, 2) for _ in range(rows)]
        status, solution = solve_unique(m, b)
        r = rank(m)
        r_aug = rank([row + [bb] for row, bb in zip(m, b)])
        if status == UNIQUE:
            assert r == cols == r_aug
            assert [
                sum(c * x for c, x in zip(row, solution)) for row in m
            ] == [F(bb) for bb in b]
        elif status == NO_SOLUTION:
            assert r_aug > r
        else:
            assert status == NON_UNIQUE
            assert r < cols and r_aug == r


def test_kernel_left_orientation_fixture():
    # remove {1,2,4,5} from {{3,4,5},{1,2,4,5},{2,3},{1,3}} on five players:
    # the complement of the remaining column span is two-dimensional
    remaining = RatMatrix.from_collection([0b11100, 0b00110, 0b00101], 5)
    basis = left_null_space(remaining)
    assert len(basis) == 2
    for y in basis:
        for j in range(remaining.n_cols):
            assert sum(a * b for a, b in zip(y, remaining.column(j))) == 0
    # the span is exactly {(-t, -t, t, s, -t-s)}
    expected = [(-1, -1, 1, 0, -1), (0, 0, 0, 1, -1)]
    stacked = [list(map(F, v)) for v in expected]
    for y in basis:
        assert rank(stacked + [list(y)]) == 2
    for v in expected:
        assert rank([list(y) for y in basis] + [list(map(F, v))]) == 2


def test_kernel_full_rank_empty_and_duplicate_column():
    square = RatMatrix.from_rows([[1, 0], [0, 1]])
    assert left_null_space(square) == []
    assert null_space(square) == []
    duplicated = RatMatrix.from_columns([(1,), (1,)])
    basis = null_space(duplicated)
    assert len(basis) == 1
    y = basis[0]
    assert y[0] * 1 + y[1] * 1 == 0 and y != (0, 0)


def test_kernel_sides():
    m = RatMatrix.from_rows([[1, 1, 0]])
    assert kernel_basis(m, side="right") == null_space(m)
    assert kernel_basis(m, side="left") == left_null_space(m)


def test_null_space_satisfies_equations_random():
    rng = random.Random(5)
    for _ in range(100):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 5)
        m = [[rng.randint(-2, 2) for _ in range(cols)] for _ in range(rows)]
        basis = null_space(m)
        assert len(basis) == cols - rank(m)
        for vec in basis:
            assert all(
                sum(c * x for c, x in zip(row, vec)) == 0 for row in m
            )


def test_in_column_span():
    m = RatMatrix.from_columns([(1, 0, 1), (0, 1, 1)])
    assert in_column_span(m, (1, 1, 2))
    assert not in_column_span(m, (1, 1, 0))
