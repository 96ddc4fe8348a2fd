"""Dense exact linear algebra: elimination, charpoly, Kronecker products."""

import pytest

from trimmeq.errors import Singular
from trimmeq.field import Fp, Rng
from trimmeq.linalg import (
    Mat,
    SpanAccumulator,
    assemble_block_diagonal,
    char_poly,
    extract_block,
    in_span,
    kron,
    random_invertible,
    rref_rank_nullspace,
    same_span,
    solve_linear,
)

F = Fp()
FS = Fp(10007)  # exercises the small-prime kernel lane
FP = Fp((1 << 89) - 1)  # no fast lane: pure-Python paths


@pytest.fixture(params=[F, FS, FP], ids=["m61", "small", "py"])
def field(request):
    return request.param


def test_rank_nullspace_identity_and_zero(field):
    eye = Mat.identity(field, 3)
    rank, basis = rref_rank_nullspace(eye)
    assert rank == 3 and basis == []
    zero = Mat.zeros(field, 2, 3)
    rank, basis = rref_rank_nullspace(zero)
    assert rank == 0 and len(basis) == 3


def test_nullspace_planted_rank(field):
    rng = Rng(1)
    A = Mat.random(field, 6, 4, rng)
    B = Mat.random(field, 4, 6, rng)
    M = A * B
    rank, basis = rref_rank_nullspace(M)
    assert rank == 4
    assert len(basis) == 2
    for v in basis:
        assert M.matvec(v) == [0] * 6


def test_solve_identity_and_inconsistent(field):
    eye = Mat.identity(field, 3)
    part, hom = solve_linear(eye, [5, 6, 7])
    assert part == [5, 6, 7] and hom == []
    zero = Mat.zeros(field, 2, 2)
    assert solve_linear(zero, [1, 0]) is None


def test_solve_multiply_back(field):
    rng = Rng(2)
    A = random_invertible(field, 5, rng)
    b = rng.vector(field, 5)
    x, hom = solve_linear(A, b)
    assert hom == []
    assert A.matvec(x) == b


def test_solve_matrix_rhs(field):
    rng = Rng(3)
    A = random_invertible(field, 4, rng)
    B = Mat.random(field, 4, 2, rng)
    X, hom = solve_linear(A, B)
    assert A * X == B


def test_inverse_trivial_and_diag():
    f = Fp(7)
    assert Mat.identity(f, 3).inverse() == Mat.identity(f, 3)
    d = Mat.from_rows(f, [[2, 0], [0, 3]])
    assert d.inverse() == Mat.from_rows(f, [[4, 0], [0, 5]])
    with pytest.raises(Singular):
        Mat.zeros(f, 2, 2).inverse()


def test_random_invertible_many_seeds(field):
    for seed in range(20):
        M = random_invertible(field, 8 if field is F else 4, Rng(seed))
        assert M.det() != 0


def _charpoly_cofactor(field, M):
    """Brute-force characteristic polynomial via cofactor determinants of
    the polynomial matrix tI - M (coefficients as univariate lists)."""
    from trimmeq.poly import uni_mul, uni_scale, uni_sub, uni_trim

    n = M.nrows

    def det(rows):
        if len(rows) == 1:
            return rows[0][0]
        total = []
        for j in range(len(rows)):
            minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
            term = uni_mul(field, rows[0][j], det(minor))
            if j % 2:
                term = uni_scale(field, term, field.p - 1)
            total = uni_sub(field, total, uni_scale(field, term, field.p - 1))
        return total

    rows = [
        [
            uni_trim([(-M.rows[i][j]) % field.p, 1 if i == j else 0])
            for j in range(n)
        ]
        for i in range(n)
    ]
    return det(rows)


def test_charpoly_trivial_cases(field):
    eye = Mat.identity(field, 2)
    # (t - 1)^2 = 1 - 2t + t^2
    assert char_poly(eye) == [1, field.p - 2, 1]
    d = Mat.from_rows(field, [[1, 0], [0, 2]])
    assert char_poly(d) == [2, field.p - 3, 1]


def test_charpoly_against_cofactor_oracle():
    rng = Rng(12)
    for _ in range(3):
        M = Mat.random(F, 4, 4, rng)
        assert char_poly(M) == _charpoly_cofactor(F, M)


def test_charpoly_conjugation_invariant():
    rng = Rng(13)
    for _ in range(10):
        M = Mat.random(F, 6, 6, rng)
        P = random_invertible(F, 6, rng)
        assert char_poly(P * M * P.inverse()) == char_poly(M)


def test_kron_block_diagonal_and_identity(field):
    X = Mat.from_rows(field, [[1, 2], [3, 4]])
    K = kron(Mat.identity(field, 2), X)
    assert extract_block(K, 0, 0, 2) == X
    assert extract_block(K, 1, 1, 2) == X
    assert extract_block(K, 0, 1, 2).is_zero()
    assert kron(X, Mat.identity(field, 1)) == X


def test_kron_mixed_product(field):
    rng = Rng(21)
    for _ in range(20):
        A, B, C, D = (Mat.random(field, 2, 2, rng) for _ in range(4))
        assert kron(A, B) * kron(C, D) == kron(A * C, B * D)


def test_extract_assemble_inverse():
    rng = Rng(5)
    blocks = [Mat.random(F, 3, 3, rng) for _ in range(3)]
    M = assemble_block_diagonal(blocks)
    for k, b in enumerate(blocks):
        assert extract_block(M, k, k, 3) == b


def test_rank_plus_nullity(field):
    rng = Rng(30)
    for _ in range(10):
        M = Mat.random(field, 5, 7, rng)
        rank, basis = rref_rank_nullspace(M)
        assert rank + len(basis) == 7


def test_span_accumulator_matches_in_span():
    rng = Rng(40)
    vecs = [rng.vector(F, 6) for _ in range(4)]
    acc = SpanAccumulator(F, 6)
    for v in vecs:
        acc.add(v)
    for _ in range(10):
        c = [rng.scalar(F) for _ in range(4)]
        comb = [sum(ci * vi[t] for ci, vi in zip(c, vecs)) % F.p for t in range(6)]
        assert acc.contains(comb)
        assert in_span(F, vecs, comb)
    w = rng.vector(F, 6)
    assert acc.contains(w) == in_span(F, vecs, w)


def test_same_span_permuted_basis():
    rng = Rng(41)
    vecs = [rng.vector(F, 5) for _ in range(3)]
    mixed = [
        [sum(r * v[t] for r, v in zip(row, vecs)) % F.p for t in range(5)]
        for row in random_invertible(F, 3, rng).rows
    ]
    assert same_span(F, vecs, mixed)
    assert not same_span(F, vecs, [rng.vector(F, 5) for _ in range(3)])
