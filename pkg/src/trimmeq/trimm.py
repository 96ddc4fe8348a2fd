"""The trace-of-iterated-matrix-multiplication polynomial family.

Tr-IMM_{w,d} is the trace of a product of d symbolic w x w matrices.  The
n = w^2 d variables split into d blocks of w^2; block k is enumerated
row-major when k is even and column-major when k is odd, and all block
indices are cyclic mod d.  Everything downstream (Lie generators, layer
extraction, witness conventions) leans on this ordering.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .field import Fp, Rng
from .linalg import Mat, assemble_block_diagonal, random_invertible
from .poly import Blackbox, ComposedBlackbox, MPoly, pit_equal


class TrimmShape:
    """Width w >= 2, length d >= 3, n = w^2 d variables."""

    __slots__ = ("w", "d", "n")

    def __init__(self, w: int, d: int):
        if w < 2 or d < 3:
            raise InputError(f"need w >= 2 and d >= 3, got w={w}, d={d}")
        self.w = w
        self.d = d
        self.n = w * w * d

    def __repr__(self):
        return f"TrimmShape(w={self.w}, d={self.d})"

    def __eq__(self, other):
        return isinstance(other, TrimmShape) and (self.w, self.d) == (other.w, other.d)

    def block_vars(self, k: int) -> list[int]:
        """Flat indices of block k (k taken mod d)."""
        k %= self.d
        w2 = self.w * self.w
        return list(range(k * w2, (k + 1) * w2))


def var_index(shape: TrimmShape, k: int, i: int, j: int) -> int:
    """Flat index of the (i, j) entry of layer k (i, j are 1-based).

    Row-major inside even blocks, column-major inside odd blocks.
    """
    w, d = shape.w, shape.d
    k %= d
    if not (1 <= i <= w and 1 <= j <= w):
        raise InputError(f"entry ({i},{j}) outside [1,{w}]^2")
    off = (i - 1) * w + (j - 1) if k % 2 == 0 else (j - 1) * w + (i - 1)
    return k * w * w + off


def var_entry(shape: TrimmShape, flat: int) -> tuple[int, int, int]:
    """Inverse of var_index: flat position -> (k, i, j), 1-based i, j."""
    w = shape.w
    k, off = divmod(flat, w * w)
    if k % 2 == 0:
        i, j = divmod(off, w)
        return k, i + 1, j + 1
    j, i = divmod(off, w)
    return k, i + 1, j + 1


def layer_from_point(shape: TrimmShape, k: int, block_vals: list[int], field: Fp) -> Mat:
    """Assemble the w x w layer-k matrix from the block's w^2 values."""
    w = shape.w
    rows = [[0] * w for _ in range(w)]
    for off, v in enumerate(block_vals):
        if k % 2 == 0:
            i, j = divmod(off, w)
        else:
            j, i = divmod(off, w)
        rows[i][j] = v % field.p
    return Mat(field, rows)


class TraceProductBlackbox(Blackbox):
    """Evaluates tr(Q_0 Q_1 ... Q_{d-1}) directly: O(d w^3) per query."""

    def __init__(self, field: Fp, shape: TrimmShape):
        super().__init__(field, shape.n, shape.d)
        self.shape = shape

    def eval(self, point):
        self._check_arity(point)
        shape = self.shape
        M = layer_from_point(shape, 0, point[: shape.w ** 2], self.field)
        w2 = shape.w ** 2
        for k in range(1, shape.d):
            M = M * layer_from_point(shape, k, point[k * w2 : (k + 1) * w2], self.field)
        return M.trace()

    def _layers_np(self, pts: np.ndarray):
        """Per-layer (w, w, B) arrays respecting the block orderings."""
        shape = self.shape
        w, w2 = shape.w, shape.w ** 2
        layers = []
        for k in range(shape.d):
            blk = pts[:, k * w2 : (k + 1) * w2]
            L = np.empty((w, w, len(pts)), dtype=np.int64)
            for off in range(w2):
                if k % 2 == 0:
                    i, j = divmod(off, w)
                else:
                    j, i = divmod(off, w)
                L[i, j] = blk[:, off]
            layers.append(L)
        return layers

    def eval_many(self, pts):
        k = self.field.kernel
        if k is None:
            return super().eval_many(pts)
        layers = self._layers_np(pts)
        M = layers[0]
        w = self.shape.w
        for L in layers[1:]:
            M = _bat_matmul(k, M, L, w)
        acc = np.zeros(len(pts), dtype=np.int64)
        for i in range(w):
            acc = k.add(acc, M[i, i])
        return acc

    def gradient_many(self, pts):
        """d tr(prod)/dQ_k[i,j] = (Q_{k+1} ... Q_{k-1})[j, i], batched."""
        kern = self.field.kernel
        if kern is None:
            return super().gradient_many(pts)
        shape = self.shape
        w, w2, d = shape.w, shape.w ** 2, shape.d
        B = len(pts)
        layers = self._layers_np(pts)
        eye = np.zeros((w, w, B), dtype=np.int64)
        for i in range(w):
            eye[i, i] = 1
        prefix = [eye]  # prefix[k] = Q_0 ... Q_{k-1}
        for k in range(d - 1):
            prefix.append(_bat_matmul(kern, prefix[-1], layers[k], w))
        suffix = [eye]  # suffix[k] = Q_{k+1} ... Q_{d-1}, built backwards
        for k in range(d - 1, 0, -1):
            suffix.append(_bat_matmul(kern, layers[k], suffix[-1], w))
        suffix.reverse()  # suffix[k] for k in 0..d-1
        out = np.empty((B, shape.n), dtype=np.int64)
        for k in range(d):
            G = _bat_matmul(kern, suffix[k], prefix[k], w)  # (Q_{k+1}..Q_{k-1})
            for off in range(w2):
                if k % 2 == 0:
                    i, j = divmod(off, w)
                else:
                    j, i = divmod(off, w)
                out[:, k * w2 + off] = G[j, i]
        return out

    def gradient(self, point):
        pts = np.array([point], dtype=np.int64)
        if self.field.kernel is not None:
            return [int(x) for x in self.gradient_many(pts)[0]]
        return super().gradient(point)


def _bat_matmul(kern, A, B, w):
    """(w, w, B) batched matrix product."""
    nb = A.shape[2]
    C = np.zeros((w, w, nb), dtype=np.int64)
    for i in range(w):
        for j in range(w):
            acc = C[i, j]
            for u in range(w):
                acc = kern.add(acc, kern.mul(A[i, u], B[u, j]))
            C[i, j] = acc
    return C


def trimm_blackbox(field: Fp, shape: TrimmShape) -> TraceProductBlackbox:
    return TraceProductBlackbox(field, shape)


def trimm_explicit(field: Fp, shape: TrimmShape) -> MPoly:
    """Explicit sparse expansion: one monomial per cyclic index path."""
    w, d, n = shape.w, shape.d, shape.n
    out = MPoly.zero(field, n)

    def rec(k, first, cur, exps):
        if k == d:
            if cur == first:
                out.add_term(tuple(exps), 1)
            return
        for nxt in range(1, w + 1):
            e2 = list(exps)
            e2[var_index(shape, k, cur, nxt)] += 1
            rec(k + 1, first, nxt, e2)

    for start in range(1, w + 1):
        rec(0, start, start, [0] * n)
    return out


def lie_generator(shape: TrimmShape, k: int, M: Mat) -> Mat:
    """The n x n infinitesimal symmetry determined by layer k and M.

    The generator scales layer k by M on the right and layer k+1 by -M on
    the left; its nonzero blocks (explicit parity table, matching the
    within-block orderings) are:

        block k:    I (x) M^T  if k even,   M^T (x) I  if k odd
        block k+1:  -M (x) I   if k+1 even, -I (x) M   if k+1 odd
    """
    field = M.field
    w, d, n = shape.w, shape.d, shape.n
    k %= d
    kn = (k + 1) % d
    eye = Mat.identity(field, w)
    upper = _kron(eye, M.transpose()) if k % 2 == 0 else _kron(M.transpose(), eye)
    lower = _kron(-M, eye) if kn % 2 == 0 else _kron(eye, -M)
    out = Mat.zeros(field, n, n)
    w2 = w * w
    out.set_block(k * w2, k * w2, upper)
    out.set_block(kn * w2, kn * w2, lower)
    return out


def _kron(A: Mat, B: Mat) -> Mat:
    from .linalg import kron

    return kron(A, B)


def lie_generator_basis(field: Fp, shape: TrimmShape) -> list[Mat]:
    """All d*w^2 generators lie_generator(k, E_uv)."""
    out = []
    w = shape.w
    for k in range(shape.d):
        for u in range(w):
            for v in range(w):
                E = Mat.zeros(field, w, w)
                E.rows[u][v] = 1
                out.append(lie_generator(shape, k, E))
    return out


def distinct_diagonal_element(field: Fp, shape: TrimmShape, rng: Rng) -> Mat:
    """A diagonal Lie-algebra element with (w.h.p.) n distinct entries.

    Built as sum_k lie_generator(k, D_k) for random diagonal D_k: the entry
    indexed by layer-k position (i, j) comes out as D_k[j] - D_{k-1}[i].
    """
    total = Mat.zeros(field, shape.n, shape.n)
    for k in range(shape.d):
        D = Mat.zeros(field, shape.w, shape.w)
        for i in range(shape.w):
            D.rows[i][i] = rng.scalar(field)
        total = total + lie_generator(shape, k, D)
    return total


class PlantedInstance:
    """A secret transformation A and blackbox access to Tr-IMM(A.x).

    Construction spot-checks the blackbox: the batched kernel evaluation
    must agree with the scalar path at a few random points.
    """

    def __init__(self, field: Fp, shape: TrimmShape, A: Mat, mode: str, blocks=None):
        self.field = field
        self.shape = shape
        self.A = A
        self.mode = mode
        self.blocks = blocks  # per-block B_k matrices for block mode
        self.f = ComposedBlackbox(trimm_blackbox(field, shape), A)
        if field.kernel is not None:
            pts = Rng(0xC0FFEE).array(field, (3, shape.n))
            fast = self.f.eval_many(pts)
            for t in range(3):
                assert int(fast[t]) == self.f.eval([int(x) for x in pts[t]])


def plant_instance(field: Fp, shape: TrimmShape, rng: Rng, mode: str = "full") -> PlantedInstance:
    """mode='full' draws A in GL(n); mode='block' draws block-diagonal A."""
    field.check_char_bound(shape.w, shape.d)
    if mode == "full":
        A = random_invertible(field, shape.n, rng)
        return PlantedInstance(field, shape, A, mode)
    if mode == "block":
        blocks = [random_invertible(field, shape.w ** 2, rng) for _ in range(shape.d)]
        A = assemble_block_diagonal(blocks)
        return PlantedInstance(field, shape, A, mode, blocks=blocks)
    raise InputError(f"unknown planting mode {mode!r}")


def compose_witness(field: Fp, shape: TrimmShape, witness) -> Mat:
    """Accept either a full matrix or a list of d per-block matrices."""
    if isinstance(witness, Mat):
        return witness
    if len(witness) != shape.d:
        raise InputError("block witness must have d matrices")
    return assemble_block_diagonal(list(witness))


def verify_witness(f: Blackbox, shape: TrimmShape, witness, trials: int, rng: Rng) -> bool:
    """PIT of f against Tr-IMM composed with the claimed witness."""
    A = compose_witness(f.field, shape, witness)
    if not A.is_invertible():
        return False
    g = ComposedBlackbox(trimm_blackbox(f.field, shape), A)
    return pit_equal(f, g, trials, rng)


def rotation_symmetry(field: Fp, shape: TrimmShape, ell: int) -> Mat:
    """Variable permutation P with Tr-IMM(P.x) = Tr-IMM(x): layer k of the
    result reads layer ell+k of the input, entrywise."""
    n = shape.n
    P = Mat.zeros(field, n, n)
    for k in range(shape.d):
        for i in range(1, shape.w + 1):
            for j in range(1, shape.w + 1):
                P.rows[var_index(shape, k, i, j)][var_index(shape, k + ell, i, j)] = 1
    return P
