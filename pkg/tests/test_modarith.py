"""The vectorized kernels agree with plain big-int arithmetic."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from trimmeq.field import Fp
from trimmeq.linalg import _py_nullspace, _py_rref
from trimmeq.modarith import M61, get_kernel

K61 = get_kernel(M61)
K_SMALL = get_kernel(10007)


@given(st.lists(st.tuples(st.integers(0, M61 - 1), st.integers(0, M61 - 1)), min_size=1, max_size=50))
@settings(max_examples=200, deadline=None)
def test_m61_mul_matches_bigint(pairs):
    a = np.array([x for x, _ in pairs], dtype=np.int64)
    b = np.array([y for _, y in pairs], dtype=np.int64)
    got = K61.mul(a, b)
    for i, (x, y) in enumerate(pairs):
        assert int(got[i]) == x * y % M61


@given(st.lists(st.tuples(st.integers(0, M61 - 1), st.integers(0, M61 - 1)), min_size=1, max_size=50))
@settings(max_examples=100, deadline=None)
def test_m61_add_sub_match_bigint(pairs):
    a = np.array([x for x, _ in pairs], dtype=np.int64)
    b = np.array([y for _, y in pairs], dtype=np.int64)
    s = K61.add(a, b)
    d = K61.sub(a, b)
    for i, (x, y) in enumerate(pairs):
        assert int(s[i]) == (x + y) % M61
        assert int(d[i]) == (x - y) % M61


def test_m61_mul_boundary_values():
    vals = [0, 1, 2, M61 - 1, M61 - 2, (1 << 31) - 1, 1 << 31, (1 << 60) + 12345]
    a = np.array(vals, dtype=np.int64)
    for y in vals:
        got = K61.mul(a, np.int64(y))
        for i, x in enumerate(vals):
            assert int(got[i]) == x * y % M61


def _random_rows(seed, m, n, p):
    gen = np.random.default_rng(seed)
    return gen.integers(0, p, size=(m, n), dtype=np.int64)


def test_kernel_nullspace_matches_python_reference():
    for kern, p in [(K61, M61), (K_SMALL, 10007)]:
        field = Fp(p)
        for seed in range(5):
            M = _random_rows(seed, 7, 10, p)
            fast = [[int(x) for x in v] for v in kern.nullspace(M)]
            ref = _py_nullspace(p, [[int(x) for x in r] for r in M])
            assert fast == ref
            for v in fast:
                prod = [sum(int(M[i][j]) * v[j] for j in range(10)) % p for i in range(7)]
                assert prod == [0] * 7


def test_kernel_rref_matches_python_reference():
    for kern, p in [(K61, M61), (K_SMALL, 10007)]:
        for seed in range(5):
            M = _random_rows(100 + seed, 6, 9, p)
            R, piv = kern.rref(M)
            R2, piv2 = _py_rref(p, [[int(x) for x in r] for r in M])
            assert piv == piv2
            assert [[int(x) for x in r] for r in R] == R2


def test_kernel_rref_rank_deficient():
    p = M61
    gen = np.random.default_rng(0)
    A = gen.integers(0, p, size=(6, 3), dtype=np.int64)
    B = gen.integers(0, p, size=(3, 6), dtype=np.int64)
    M = np.zeros((6, 6), dtype=np.int64)
    for i in range(6):
        for j in range(6):
            M[i, j] = sum(int(A[i, t]) * int(B[t, j]) for t in range(3)) % p
    assert K61.rank(M) == 3
    basis = K61.nullspace(M)
    assert len(basis) == 3


def test_kernel_det_and_matmul():
    p = M61
    field = Fp(p)
    gen = np.random.default_rng(7)
    A = gen.integers(0, p, size=(5, 5), dtype=np.int64)
    B = gen.integers(0, p, size=(5, 5), dtype=np.int64)
    C = K61.matmul(A, B)
    for i in range(5):
        for j in range(5):
            assert int(C[i, j]) == sum(int(A[i, t]) * int(B[t, j]) for t in range(5)) % p
    dA = K61.det(A)
    dB = K61.det(B)
    assert K61.det(C.astype(np.int64)) == dA * dB % p
    assert K61.det(np.eye(4, dtype=np.int64)) == 1
