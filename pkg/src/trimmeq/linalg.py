"""Dense exact linear algebra over F_p.

Matrices are lists of rows of canonical ints wrapped in :class:`Mat`.
Elimination-heavy routines dispatch to the vectorized kernel when the
modulus has a fast lane (the default 2^61 - 1 does); otherwise a plain
Python Gaussian elimination with first-nonzero pivoting runs -- exact
arithmetic needs no numerical pivot strategy.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch, Singular
from .field import Fp, Rng

Vec = list  # vectors over F_p are plain lists of ints


# ---------------------------------------------------------------------------
# pure-Python elimination (reference lane, any modulus)
# ---------------------------------------------------------------------------

def _py_forward(p: int, rows: list[list[int]]):
    """In-place forward elimination; returns pivot column list."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        pr = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if pr is None:
            continue
        if pr != r:
            rows[r], rows[pr] = rows[pr], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        rows[r] = [x * inv % p for x in rows[r]]
        prow = rows[r]
        for i in range(r + 1, m):
            f = rows[i][c]
            if f:
                ri = rows[i]
                rows[i] = [(x - f * y) % p for x, y in zip(ri, prow)]
        pivots.append(c)
        r += 1
    return pivots


def _py_rref(p: int, rows: list[list[int]]):
    rows = [list(r) for r in rows]
    pivots = _py_forward(p, rows)
    for i in range(len(pivots) - 1, 0, -1):
        c = pivots[i]
        prow = rows[i]
        for j in range(i):
            f = rows[j][c]
            if f:
                rj = rows[j]
                rows[j] = [(x - f * y) % p for x, y in zip(rj, prow)]
    return rows, pivots


def _py_nullspace(p: int, rows: list[list[int]]):
    if not rows:
        return []
    n = len(rows[0])
    R, pivots = _py_rref(p, rows)
    pivset = set(pivots)
    free = [c for c in range(n) if c not in pivset]
    basis = []
    for fc in free:
        v = [0] * n
        v[fc] = 1
        for i, c in enumerate(pivots):
            v[c] = -R[i][fc] % p
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# lane dispatch helpers (accept list-rows or ndarray, return Python lists)
# ---------------------------------------------------------------------------

def nullspace_rows(field: Fp, rows) -> list[list[int]]:
    """Kernel basis of the row system ``rows . x = 0``."""
    if isinstance(rows, np.ndarray):
        m, n = rows.shape
    else:
        m = len(rows)
        n = len(rows[0]) if m else 0
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    k = field.kernel
    if k is not None:
        M = rows if isinstance(rows, np.ndarray) else k.asarray(rows)
        return [[int(x) for x in v] for v in k.nullspace(M)]
    if isinstance(rows, np.ndarray):
        rows = [[int(x) for x in r] for r in rows]
    return _py_nullspace(field.p, rows)


def rank_rows(field: Fp, rows) -> int:
    if isinstance(rows, np.ndarray):
        if rows.size == 0:
            return 0
    elif not rows:
        return 0
    k = field.kernel
    if k is not None:
        M = rows if isinstance(rows, np.ndarray) else k.asarray(rows)
        return k.rank(M)
    if isinstance(rows, np.ndarray):
        rows = [[int(x) for x in r] for r in rows]
    rows = [list(r) for r in rows]
    return len(_py_forward(field.p, rows))


def rref_rows(field: Fp, rows):
    """Reduced row echelon form; returns (rref rows as lists, pivot cols)."""
    k = field.kernel
    if k is not None:
        M = rows if isinstance(rows, np.ndarray) else k.asarray(rows)
        R, piv = k.rref(M)
        return [[int(x) for x in r] for r in R], piv
    if isinstance(rows, np.ndarray):
        rows = [[int(x) for x in r] for r in rows]
    return _py_rref(field.p, rows)


def matvec_many(field: Fp, A_rows, points: np.ndarray) -> np.ndarray:
    """Batched A.x for all rows x of points: returns (B, m) array."""
    k = field.kernel
    if k is None:
        raise RuntimeError("matvec_many requires a fast-lane modulus")
    A = A_rows if isinstance(A_rows, np.ndarray) else k.asarray(A_rows)
    return k.matmul(points, A.T)


# ---------------------------------------------------------------------------
# the matrix type
# ---------------------------------------------------------------------------

class Mat:
    """Dense matrix over F_p (row-major list of lists of canonical ints)."""

    __slots__ = ("field", "rows")

    def __init__(self, field: Fp, rows: list[list[int]]):
        self.field = field
        self.rows = rows

    # -- constructors -----------------------------------------------------
    @staticmethod
    def from_rows(field: Fp, rows) -> "Mat":
        p = field.p
        return Mat(field, [[int(x) % p for x in r] for r in rows])

    @staticmethod
    def zeros(field: Fp, r: int, c: int) -> "Mat":
        return Mat(field, [[0] * c for _ in range(r)])

    @staticmethod
    def identity(field: Fp, n: int) -> "Mat":
        return Mat(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def random(field: Fp, r: int, c: int, rng: Rng) -> "Mat":
        return Mat(field, rng.matrix(field, r, c))

    # -- basics -----------------------------------------------------------
    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def copy(self) -> "Mat":
        return Mat(self.field, [list(r) for r in self.rows])

    def __eq__(self, other):
        return (
            isinstance(other, Mat)
            and self.field == other.field
            and self.rows == other.rows
        )

    def __hash__(self):  # pragma: no cover
        return hash((self.field, tuple(map(tuple, self.rows))))

    def __repr__(self):
        return f"Mat({self.nrows}x{self.ncols} mod {self.field.p})"

    def to_numpy(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "Mat") -> "Mat":
        self.field.check_same(other.field)
        p = self.field.p
        return Mat(
            self.field,
            [[(a + b) % p for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
        )

    def __sub__(self, other: "Mat") -> "Mat":
        self.field.check_same(other.field)
        p = self.field.p
        return Mat(
            self.field,
            [[(a - b) % p for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
        )

    def __neg__(self) -> "Mat":
        p = self.field.p
        return Mat(self.field, [[-a % p for a in r] for r in self.rows])

    def scale(self, c: int) -> "Mat":
        p = self.field.p
        c %= p
        return Mat(self.field, [[a * c % p for a in r] for r in self.rows])

    def __mul__(self, other: "Mat") -> "Mat":
        self.field.check_same(other.field)
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"{self.ncols} cols vs {other.nrows} rows")
        p = self.field.p
        bt = list(zip(*other.rows))
        out = [
            [sum(a * b for a, b in zip(row, col)) % p for col in bt]
            for row in self.rows
        ]
        return Mat(self.field, out)

    def matvec(self, v: Vec) -> Vec:
        if self.ncols != len(v):
            raise ShapeMismatch(f"{self.ncols} cols vs vector of {len(v)}")
        p = self.field.p
        return [sum(a * b for a, b in zip(row, v)) % p for row in self.rows]

    def transpose(self) -> "Mat":
        return Mat(self.field, [list(r) for r in zip(*self.rows)])

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(self.nrows)) % self.field.p

    def is_zero(self) -> bool:
        return all(all(x == 0 for x in r) for r in self.rows)

    def flatten(self) -> Vec:
        return [x for r in self.rows for x in r]

    # -- elimination-backed operations -------------------------------------
    def rank(self) -> int:
        return rank_rows(self.field, self.rows)

    def nullspace(self) -> list[Vec]:
        return nullspace_rows(self.field, self.rows)

    def det(self) -> int:
        if self.nrows != self.ncols:
            raise ShapeMismatch("det of non-square matrix")
        if self.nrows == 0:
            return 1
        k = self.field.kernel
        if k is not None:
            return int(k.det(self.to_numpy()))
        return _py_det(self.field.p, self.rows)

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.det() != 0

    def inverse(self) -> "Mat":
        n = self.nrows
        if n != self.ncols:
            raise ShapeMismatch("inverse of non-square matrix")
        aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(self.rows)]
        R, piv = rref_rows(self.field, aug)
        if piv != list(range(n)):
            raise Singular("matrix is singular")
        return Mat(self.field, [r[n:] for r in R])

    def solve(self, b: Vec):
        """A particular solution of self.x = b, or None if inconsistent.

        Unlike solve_linear this skips the kernel computation.
        """
        aug = [list(r) + [bv] for r, bv in zip(self.rows, b)]
        R, piv = rref_rows(self.field, aug)
        n = self.ncols
        if any(c >= n for c in piv):
            return None
        x = [0] * n
        for i, c in enumerate(piv):
            x[c] = R[i][n]
        return x

    def charpoly(self) -> list[int]:
        """Monic characteristic polynomial det(tI - M), coeffs low-to-high.

        Evaluation at n+1 points followed by interpolation; needs p > n,
        which the modulus policy guarantees.
        """
        n = self.nrows
        if n != self.ncols:
            raise ShapeMismatch("charpoly of non-square matrix")
        field = self.field
        p = field.p
        if n == 0:
            return [1]
        ts = list(range(n + 1))
        vals = []
        for t in ts:
            M = Mat(field, [
                [(-x) % p if i != j else (t - x) % p for j, x in enumerate(row)]
                for i, row in enumerate(self.rows)
            ])
            vals.append(M.det())
        return _newton_interp(p, ts, vals)

    # -- block structure ----------------------------------------------------
    def block(self, r0: int, c0: int, h: int, w: int) -> "Mat":
        return Mat(self.field, [row[c0 : c0 + w] for row in self.rows[r0 : r0 + h]])

    def set_block(self, r0: int, c0: int, B: "Mat"):
        for i, row in enumerate(B.rows):
            self.rows[r0 + i][c0 : c0 + len(row)] = row


def _py_det(p: int, rows: list[list[int]]) -> int:
    rows = [list(r) for r in rows]
    n = len(rows)
    d = 1
    for c in range(n):
        pr = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if pr is None:
            return 0
        if pr != c:
            rows[c], rows[pr] = rows[pr], rows[c]
            d = -d % p
        piv = rows[c][c]
        d = d * piv % p
        inv = pow(piv, p - 2, p)
        prow = [x * inv % p for x in rows[c]]
        rows[c] = prow
        for i in range(c + 1, n):
            f = rows[i][c]
            if f:
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], prow)]
    return d


def _newton_interp(p: int, xs: list[int], ys: list[int]) -> list[int]:
    """Divided-difference interpolation, coefficients low-to-high."""
    n = len(xs)
    coef = [y % p for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * pow(xs[i] - xs[i - j], p - 2, p) % p
    # expand Newton form
    poly = [0] * n
    for i in range(n - 1, -1, -1):
        # poly <- poly * (t - x_i) + coef[i]
        shifted = [0] + poly[:-1]
        poly = [(s - xs[i] * q) % p for s, q in zip(shifted, poly)]
        poly[0] = (poly[0] + coef[i]) % p
    # trim leading zeros (keep at least the constant term)
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


# ---------------------------------------------------------------------------
# free-standing operations
# ---------------------------------------------------------------------------

def rref_rank_nullspace(M: Mat):
    """(rank, kernel basis) of M.  rank + len(basis) == ncols."""
    basis = M.nullspace()
    return M.ncols - len(basis), basis


def solve_linear(A: Mat, b):
    """Solve A.x = b.

    b may be a vector or a Mat (multiple right-hand sides).  Returns
    (particular, homogeneous_basis) or None when b is outside the column
    span.  For a Mat right-hand side the particular solution is a Mat.
    """
    field = A.field
    matrix_rhs = isinstance(b, Mat)
    B = b.rows if matrix_rhs else [[x] for x in b]
    if len(B) != A.nrows:
        raise ShapeMismatch("right-hand side length mismatch")
    ncols_b = len(B[0]) if B else 0
    aug = [list(ra) + list(rb) for ra, rb in zip(A.rows, B)]
    if A.nrows == 0:
        aug = []
    R, piv = rref_rows(field, aug) if aug else ([], [])
    n = A.ncols
    if any(c >= n for c in piv):
        return None
    part = [[0] * ncols_b for _ in range(n)]
    for i, c in enumerate(piv):
        part[c] = R[i][n:]
    kernel = nullspace_rows(field, A.rows)
    if matrix_rhs:
        return Mat(field, part), kernel
    return [row[0] for row in part], kernel


def inverse(M: Mat) -> Mat:
    return M.inverse()


def random_invertible(field: Fp, n: int, rng: Rng) -> Mat:
    """Uniform-ish invertible matrix; retries until nonsingular."""
    while True:
        M = Mat.random(field, n, n, rng)
        if M.det() != 0:
            return M


def char_poly(M: Mat) -> list[int]:
    return M.charpoly()


def kron(A: Mat, B: Mat) -> Mat:
    A.field.check_same(B.field)
    p = A.field.p
    out = []
    for ra in A.rows:
        for rb in B.rows:
            out.append([a * b % p for a in ra for b in rb])
    return Mat(A.field, out)


def extract_block(M: Mat, row_block: int, col_block: int, size: int) -> Mat:
    return M.block(row_block * size, col_block * size, size, size)


def assemble_block_diagonal(blocks: list[Mat]) -> Mat:
    field = blocks[0].field
    n = sum(b.nrows for b in blocks)
    out = Mat.zeros(field, n, n)
    at = 0
    for b in blocks:
        if b.nrows != b.ncols:
            raise ShapeMismatch("block-diagonal assembly needs square blocks")
        out.set_block(at, at, b)
        at += b.nrows
    return out


def poly_at_matrix(coeffs: list[int], M: Mat) -> Mat:
    """Evaluate a univariate polynomial (coeffs low-to-high) at a matrix."""
    field = M.field
    n = M.nrows
    acc = Mat.zeros(field, n, n)
    for c in reversed(coeffs):
        acc = acc * M
        for i in range(n):
            acc.rows[i][i] = (acc.rows[i][i] + c) % field.p
    return acc



class SpanAccumulator:
    """Incrementally maintained reduced row basis of a growing span."""

    __slots__ = ("field", "n", "rows", "pivots")

    def __init__(self, field: Fp, n: int):
        self.field = field
        self.n = n
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def _reduce(self, v: Vec) -> Vec:
        p = self.field.p
        v = [x % p for x in v]
        for row, c in zip(self.rows, self.pivots):
            f = v[c]
            if f:
                v = [(x - f * y) % p for x, y in zip(v, row)]
        return v

    def contains(self, v: Vec) -> bool:
        return not any(self._reduce(v))

    def add(self, v: Vec) -> bool:
        """Insert v; returns True iff the span grew."""
        p = self.field.p
        r = self._reduce(v)
        c = next((i for i, x in enumerate(r) if x), None)
        if c is None:
            return False
        inv = pow(r[c], p - 2, p)
        r = [x * inv % p for x in r]
        # keep stored rows fully reduced against the new pivot
        for t, row in enumerate(self.rows):
            f = row[c]
            if f:
                self.rows[t] = [(x - f * y) % p for x, y in zip(row, r)]
        self.rows.append(r)
        self.pivots.append(c)
        return True


def in_span(field: Fp, basis: list[Vec], v: Vec) -> bool:
    """Exact membership of v in span(basis) via a linear solve."""
    if not basis:
        return all(x % field.p == 0 for x in v)
    A = Mat(field, [list(r) for r in zip(*basis)])
    return A.solve([x % field.p for x in v]) is not None


def same_span(field: Fp, basis_a: list[Vec], basis_b: list[Vec]) -> bool:
    if len(basis_a) != len(basis_b):
        return False
    return all(in_span(field, basis_a, v) for v in basis_b) and all(
        in_span(field, basis_b, v) for v in basis_a
    )
