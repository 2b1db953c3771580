import itertools
import random
from fractions import Fraction

from koopeig.algebra import (
    canonical_vector,
    linear_solve_exact,
    nullspace_exact,
    quad,
    rank,
)

F = Fraction


def test_nullspace_all_ones_row():
    # oracle: every integer vector with entries in [-3, 3] annihilating
    # [1 1 1] must lie in the span of the returned basis
    basis = nullspace_exact([[F(1), F(1), F(1)]])
    assert sorted(tuple(v) for v in basis) == [
        (F(1), F(-1), F(0)),
        (F(1), F(0), F(-1)),
    ]
    span = set()
    for a in range(-9, 10):
        for b in range(-9, 10):
            v1, v2 = basis
            span.add(tuple(a * x + b * y for x, y in zip(v1, v2)))
    for candidate in itertools.product(range(-3, 4), repeat=3):
        if sum(candidate) == 0:
            assert tuple(F(c) for c in candidate) in span


def test_nullspace_trivial_cases():
    assert nullspace_exact([[F(1), F(0)], [F(0), F(1)]]) == []
    basis = nullspace_exact([[F(0), F(0), F(0)]])
    assert len(basis) == 3


def test_rank_examples():
    assert rank([[F(1), F(0), F(-1)], [F(1), F(-1), F(0)]]) == 2
    assert rank([[F(-1), F(0), F(1)], [F(1), F(0), F(-1)]]) == 1
    assert rank([]) == 0


def test_solve_examples():
    assert linear_solve_exact([[F(1), F(0)], [F(0), F(1)]], [F(3), F(4)]) == [
        F(3),
        F(4),
    ]
    # inconsistent system is reported, not silently fixed
    assert (
        linear_solve_exact([[F(1), F(1)], [F(1), F(1)]], [F(1), F(2)]) is None
    )


def test_canonical_vector_scaling():
    assert canonical_vector([F(-1, 2), F(0), F(1, 2)]) == [F(1), F(0), F(-1)]
    assert canonical_vector([F(2), F(-4)]) == [F(1), F(-2)]
    assert canonical_vector([F(0), F(-3)]) == [F(0), F(1)]


def test_canonical_vector_quadratic_extension():
    v = canonical_vector([quad(0, F(-1, 2), 2), F(1, 2)])
    # scaled by -2: first nonzero entry sqrt(2) > 0
    assert v[0] == quad(0, 1, 2) and v[1] == F(-1)


def test_nullspace_annihilates_and_rank_nullity():
    rng = random.Random(3)
    for _ in range(60):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 5)
        mat = [
            [F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(cols)]
            for _ in range(rows)
        ]
        basis = nullspace_exact(mat)
        for v in basis:
            for row in mat:
                assert sum(r * x for r, x in zip(row, v)) == 0
        assert rank(mat) + len(basis) == cols


def test_solve_random_consistent():
    rng = random.Random(4)
    for _ in range(40):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 4)
        mat = [
            [F(rng.randint(-3, 3)) for _ in range(cols)] for _ in range(rows)
        ]
        x_true = [F(rng.randint(-3, 3)) for _ in range(cols)]
        rhs = [sum(r * x for r, x in zip(row, x_true)) for row in mat]
        x = linear_solve_exact(mat, rhs)
        assert x is not None
        assert [
            sum(r * v for r, v in zip(row, x)) for row in mat
        ] == rhs


def test_quadratic_extension_elimination():
    s2 = quad(0, 1, 2)
    mat = [[s2, F(-2)], [F(1), -s2]]  # rank 1: second row = first / sqrt(2)
    assert rank(mat) == 1
    basis = nullspace_exact(mat)
    assert len(basis) == 1
    v = basis[0]
    assert s2 * v[0] - 2 * v[1] == 0
