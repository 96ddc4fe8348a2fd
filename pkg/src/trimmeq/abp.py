"""Evaluation dimension and set-multilinear branching program reconstruction.

A set-multilinear ABP over blocks B_0..B_{d-1} is a product
row(1xW) . mid(WxW)^{d-2} . col(Wx1) of linear matrices, layer k reading
only block-k variables.  Reconstruction recovers a min-width ABP from
blackbox access by anchoring random suffix assignments and solving one
linear system per layer; the result is certified against the blackbox by
randomized identity testing.
"""

from __future__ import annotations

import numpy as np

from .errors import AnchorSingular, CertificationFailed
from .field import Fp, Rng
from .linalg import Mat, rank_rows
from .poly import Blackbox, LinMat, pit_equal


def evaldim(f: Blackbox, fixed_vars: list[int], samples: int, rng: Rng) -> int:
    """Rank of the span of partial evaluations of f at the fixed variables.

    Draws `samples` random assignments for the fixed variables and the same
    number of probe points for the rest; the estimate is the rank of the
    samples x samples value matrix.  Monte-Carlo: may only underestimate.
    """
    field = f.field
    n = f.n
    fixed = list(fixed_vars)
    rest = [i for i in range(n) if i not in set(fixed)]
    m = samples
    if field.kernel is not None:
        assigns = rng.array(field, (m, len(fixed)))
        probes = rng.array(field, (m, len(rest)))
        pts = np.zeros((m * m, n), dtype=np.int64)
        for c, v in enumerate(fixed):
            pts[:, v] = np.repeat(assigns[:, c], m)
        for c, v in enumerate(rest):
            pts[:, v] = np.tile(probes[:, c], m)
        vals = f.eval_many(pts).reshape(m, m)
        return rank_rows(field, vals)
    rows = []
    probes = [rng.vector(field, len(rest)) for _ in range(m)]
    for _ in range(m):
        assign = rng.vector(field, len(fixed))
        row = []
        for pr in probes:
            point = [0] * n
            for v, x in zip(fixed, assign):
                point[v] = x
            for v, x in zip(rest, pr):
                point[v] = x
            row.append(f.eval(point))
        rows.append(row)
    return rank_rows(field, rows)


class SetMultABP:
    """Layered linear-matrix product: 1xW row, then WxW layers, then Wx1."""

    def __init__(self, field: Fp, blocks: list[list[int]], layers: list[LinMat], n: int):
        self.field = field
        self.blocks = blocks
        self.layers = layers
        self.n = n  # arity of the ambient variable space

    @property
    def width(self) -> int:
        return self.layers[0].ncols

    @property
    def d(self) -> int:
        return len(self.layers)

    def eval(self, point: list[int]) -> int:
        M = self.layers[0].eval(point)
        for L in self.layers[1:]:
            M = M * L.eval(point)
        return M.rows[0][0]

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        kern = self.field.kernel
        if kern is None:
            return np.array([self.eval([int(x) for x in r]) for r in pts], dtype=object)
        B = len(pts)
        cur = _eval_layer_np(kern, self.layers[0], pts)
        for L in self.layers[1:]:
            nxt = _eval_layer_np(kern, L, pts)
            cur = _chain_np(kern, cur, nxt)
        return cur[0, 0]

    def as_blackbox(self) -> Blackbox:
        abp = self

        class _BB(Blackbox):
            def eval(self, point):
                return abp.eval(point)

            def eval_many(self, pts):
                return abp.eval_many(pts)

        return _BB(self.field, self.n, self.d)


def _eval_layer_np(kern, L: LinMat, pts: np.ndarray):
    """Batched evaluation of a linear matrix: (r, c, B) array."""
    B = len(pts)
    out = np.zeros((L.nrows, L.ncols, B), dtype=np.int64)
    for i in range(L.nrows):
        for j in range(L.ncols):
            acc = np.full(B, L.const[i][j], dtype=np.int64)
            for v, cf in enumerate(L.coeffs[i][j]):
                if cf:
                    acc = kern.add(acc, kern.mul(pts[:, v], cf))
            out[i, j] = acc
    return out


def _chain_np(kern, A, B):
    r, k, nb = A.shape
    k2, c, _ = B.shape
    C = np.zeros((r, c, nb), dtype=np.int64)
    for i in range(r):
        for j in range(c):
            acc = C[i, j]
            for u in range(k):
                acc = kern.add(acc, kern.mul(A[i, u], B[u, j]))
            C[i, j] = acc
    return C


def _coeffs_of_linear_restriction(f: Blackbox, template: list[int], block: list[int]):
    """Coefficient vector of the linear form x_block -> f(template with block=x).

    f restricted this way is homogeneous linear for set-multilinear f, so
    unit-vector evaluations read the coefficients off directly.
    """
    field = f.field
    out = []
    if field.kernel is not None:
        B = len(block)
        pts = np.tile(np.array(template, dtype=np.int64), (B, 1))
        for t, v in enumerate(block):
            pts[t, v] = 1
        # zero out the block except the probed variable
        for t, v in enumerate(block):
            for u in block:
                if u != v:
                    pts[t, u] = 0
        return [int(x) for x in f.eval_many(pts)]
    for v in block:
        q = list(template)
        for u in block:
            q[u] = 0
        q[v] = 1
        out.append(f.eval(q))
    return out


def reconstruct_abp(
    h: Blackbox,
    blocks: list[list[int]],
    width: int,
    rng: Rng,
    certify_points: int = 50,
    attempts: int = 3,
) -> SetMultABP:
    """Width-`width` set-multilinear ABP computing the d-tensor h.

    Layer k is solved from anchor systems: suffix anchors fix random values
    for blocks k+1.., prefix anchors instantiate the already-built partial
    product; the anchor matrix must be invertible (resampled up to 3 times,
    else AnchorSingular).  The output is PIT-certified against h.
    """
    field = h.field
    last_err: Exception = AnchorSingular("no attempt ran")
    for _ in range(attempts):
        try:
            abp = _reconstruct_once(h, blocks, width, rng)
        except AnchorSingular as e:
            last_err = e
            continue
        bb = abp.as_blackbox()
        if pit_equal(h, bb, certify_points, rng):
            return abp
        last_err = CertificationFailed("reconstructed ABP failed identity test")
    raise last_err


def _suffix_template(field: Fp, n: int, blocks, k: int, rng: Rng) -> list[int]:
    """Random assignment to blocks k+1.. (zero elsewhere)."""
    t = [0] * n
    for b in blocks[k + 1 :]:
        for v in b:
            t[v] = rng.scalar(field)
    return t


def _reconstruct_once(h: Blackbox, blocks, W: int, rng: Rng) -> SetMultABP:
    field = h.field
    d = len(blocks)
    n = h.n

    # layer 0: entries are h with suffix anchored
    suffix = [_suffix_template(field, n, blocks, 0, rng) for _ in range(W)]
    Y0 = LinMat(field, 1, W, n)
    for j in range(W):
        coeffs = _coeffs_of_linear_restriction(h, suffix[j], blocks[0])
        for v, c in zip(blocks[0], coeffs):
            Y0.coeffs[0][j][v] = c
    layers = [Y0]

    for k in range(1, d):
        layer = None
        for _ in range(3):
            prefixes = []
            for _ in range(W):
                pt = [0] * n
                for b in blocks[:k]:
                    for v in b:
                        pt[v] = rng.scalar(field)
                prefixes.append(pt)
            # anchor matrix: rows are the partial products at the prefixes
            A_rows = []
            for pt in prefixes:
                M = layers[0].eval(pt)
                for L in layers[1:]:
                    M = M * L.eval(pt)
                A_rows.append(M.rows[0])
            A = Mat(field, A_rows)
            if A.det() == 0:
                continue
            Ainv = A.inverse()
            if k < d - 1:
                suffix = [_suffix_template(field, n, blocks, k, rng) for _ in range(W)]
                G = [[None] * W for _ in range(W)]
                for i, pre in enumerate(prefixes):
                    for j in range(W):
                        # prefix and suffix assignments have disjoint support
                        t = [(a + b) % field.p for a, b in zip(pre, suffix[j])]
                        G[i][j] = _coeffs_of_linear_restriction(h, t, blocks[k])
                layer = LinMat(field, W, W, n)
                p = field.p
                for i in range(W):
                    for j in range(W):
                        acc = [0] * len(blocks[k])
                        for u in range(W):
                            f = Ainv.rows[i][u]
                            if f:
                                acc = [(a + f * b) % p for a, b in zip(acc, G[u][j])]
                        for v, c in zip(blocks[k], acc):
                            layer.coeffs[i][j][v] = c
            else:
                G = [_coeffs_of_linear_restriction(h, pre, blocks[k]) for pre in prefixes]
                layer = LinMat(field, W, 1, n)
                p = field.p
                for i in range(W):
                    acc = [0] * len(blocks[k])
                    for u in range(W):
                        f = Ainv.rows[i][u]
                        if f:
                            acc = [(a + f * b) % p for a, b in zip(acc, G[u])]
                    for v, c in zip(blocks[k], acc):
                        layer.coeffs[i][0][v] = c
            break
        if layer is None:
            raise AnchorSingular(f"anchor matrix singular at layer {k}")
        layers.append(layer)
    return SetMultABP(field, [list(b) for b in blocks], layers, n)
