"""The full equivalence-testing pipeline for the trace polynomial family.

Three stages:

* ``trace_to_tensor_iso`` -- from an arbitrary-basis blackbox to a d-tensor
  isomorphic to Tr-IMM, through the irreducible invariant subspaces of the
  Lie algebra and an evaluation-dimension block ordering.
* ``tensor_iso_to_det`` -- from the d-tensor to per-block transformations,
  through set-multilinear ABP reconstruction, determinant-oracle queries on
  the middle layers, intertwiner solves, and Kronecker factorization.
* ``trace_equivalence`` -- the composition, returning (w, A) with a final
  randomized identity test, or None for "no such w exists".

Gate failures return None (optionally recording the gate in a RunReport);
certified witnesses are the only non-None results.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .abp import evaldim, reconstruct_abp
from .errors import AnchorSingular, CertificationFailed, NotAPerfectPower, StructureViolation
from .field import Fp, Rng
from .lie import Reject, irreducible_invariant_subspaces
from .linalg import Mat, assemble_block_diagonal, kron, nullspace_rows
from .poly import (
    Blackbox,
    ComposedBlackbox,
    LinMat,
    MPoly,
    det_linear_matrix,
    interpolate_univariate,
    pit_equal,
    uni_mul,
    uni_sub,
    wth_root,
)
from .report import _fail, _gate
from .trimm import TrimmShape, trimm_blackbox


@dataclass
class OrderingReport:
    """Recovered cyclic order of the blocks plus the evaldim table."""

    tau: list[int]
    evaldim_table: list[list[int]]


def order_blocks(g: Blackbox, shape: TrimmShape, rng: Rng) -> OrderingReport | None:
    """Chain the blocks of a d-tensor into cyclic order via evaluation
    dimension: adjacent block pairs give w^2, non-adjacent w^4.  None when
    the adjacency structure is broken."""
    w, d = shape.w, shape.d
    m = w ** 4 + 16
    table = [[0] * d for _ in range(d)]
    for r in range(d):
        for rp in range(r + 1, d):
            fixed = shape.block_vars(r) + shape.block_vars(rp)
            e = evaldim(g, fixed, m, rng)
            table[r][rp] = table[rp][r] = e
    neighbors = [
        {rp for rp in range(d) if rp != r and table[r][rp] == w * w} for r in range(d)
    ]
    if any(len(s) != 2 for s in neighbors):
        return None
    if d == 3:
        return OrderingReport(list(range(3)), table)
    tau = [0, min(neighbors[0])]
    while len(tau) < d:
        nxt = neighbors[tau[-1]] - {tau[-2]}
        if len(nxt) != 1:
            return None
        tau.append(nxt.pop())
    if len(set(tau)) != d or tau[0] not in neighbors[tau[-1]]:
        return None
    return OrderingReport(tau, table)


def trace_to_tensor_iso(f: Blackbox, d: int, rng: Rng, report=None):
    """Algorithm: invariant subspaces -> V -> block ordering -> A' = V.B.

    Returns (A', w) such that f(A'.x) is a d-tensor isomorphic to
    Tr-IMM_{w,d} (certified downstream), or None.
    """
    n = f.n
    spaces = irreducible_invariant_subspaces(f, rng, expected_count=d)
    if isinstance(spaces, Reject):
        _fail(report, f"invariant-subspaces:{spaces.gate}")
        return None
    _gate(report, "invariant-subspaces")
    dim = spaces[0].dim
    w = isqrt(dim)
    if w * w != dim or w < 2 or n != dim * d:
        _fail(report, "square-dimension")
        return None
    _gate(report, "square-dimension")
    field = f.field
    cols = []
    for s in spaces:
        cols.extend(s.basis)
    V = Mat(field, [list(r) for r in zip(*cols)])
    if not V.is_invertible():
        _fail(report, "subspace-independence")
        return None
    _gate(report, "subspace-independence")
    shape = TrimmShape(w, d)
    h0 = ComposedBlackbox(f, V)
    ordering = order_blocks(h0, shape, rng)
    if ordering is None:
        _fail(report, "adjacency")
        return None
    _gate(report, "adjacency")
    w2 = w * w
    B = Mat.zeros(field, n, n)
    for k in range(d):
        tk = ordering.tau[k]
        for s in range(w2):
            B.rows[tk * w2 + s][k * w2 + s] = 1
    return V * B, w


# ---------------------------------------------------------------------------
# middle-layer determinant roots
# ---------------------------------------------------------------------------

def _localize(Y: LinMat, block: list[int]) -> LinMat:
    """Restrict a layer's linear forms to its own block's variables."""
    out = LinMat(Y.field, Y.nrows, Y.ncols, len(block))
    for i in range(Y.nrows):
        for j in range(Y.ncols):
            out.coeffs[i][j] = [Y.coeffs[i][j][v] for v in block]
    return out


def _monic_wth_root_uni(field: Fp, U: list[int], w: int):
    """Monic u of degree deg(U)/w with u^w == U (U monic), else None."""
    D = len(U) - 1
    if D % w:
        return None
    dw = D // w
    p = field.p
    u = [0] * dw + [1]
    inv_w = field.inv(w)
    for j in range(1, dw + 1):
        uw = [1]
        for _ in range(w):
            uw = uni_mul(field, uw, u)
        uw += [0] * (D + 1 - len(uw))
        target = U[D - j] if D - j < len(U) else 0
        delta = (target - uw[D - j]) * inv_w % p
        u[dw - j] = delta
    uw = [1]
    for _ in range(w):
        uw = uni_mul(field, uw, u)
    if uni_sub(field, uw, list(U)):
        return None
    return u


def _layer_det_root(Yloc: LinMat, w: int, rng: Rng) -> MPoly | None:
    """The degree-w polynomial g with det(Yloc) = alpha * g^w, normalized
    so that its graded-lex leading coefficient is one.

    For w = 2 the 4x4 symbolic determinant is computed explicitly and the
    root extracted by wth_root.  For larger w the symbolic determinant
    blows up, so g is recovered from univariate restrictions of the
    numeric determinant along a fixed direction (each restriction is a
    perfect w-th power whose monic root pins g up to one global scalar),
    followed by exact interpolation of g's coefficients.  Both routes are
    verified by identity testing against the numeric determinant.
    """
    field = Yloc.field
    if w == 2:
        P = det_linear_matrix(Yloc)
        if P.is_zero():
            return None
        try:
            return wth_root(P, w, rng=rng)
        except NotAPerfectPower:
            return None
    W = Yloc.nrows
    nloc = Yloc.n

    def detval(point):
        return Yloc.eval(point).det()

    b = None
    for _ in range(10):
        cand = rng.vector(field, nloc)
        if detval(cand):
            b = cand
            break
    if b is None:
        return None

    def ghat(a):
        """g(a)/g(b) from the line restriction det(Y(a + t b))."""
        samples = []
        for t in range(W + 1):
            pt = [(x + t * y) % field.p for x, y in zip(a, b)]
            samples.append((t, detval(pt)))
        U = interpolate_univariate(field, samples)
        if len(U) != W + 1:
            return None
        lc = U[-1]
        Un = [x * field.inv(lc) % field.p for x in U]
        u = _monic_wth_root_uni(field, Un, w)
        if u is None:
            return None
        return u[0]

    from .poly import _monomials

    cands = _monomials(nloc, list(range(nloc)), w, homogeneous=True)
    npts = len(cands) + 12
    rows = []
    rhs = []
    p = field.p
    for _ in range(npts):
        a = rng.vector(field, nloc)
        v = ghat(a)
        if v is None:
            continue
        row = []
        for e in cands:
            t = 1
            for i, ei in enumerate(e):
                for _ in range(ei):
                    t = t * a[i] % p
            row.append(t)
        rows.append(row)
        rhs.append(v)
    if len(rows) < len(cands):
        return None
    A = Mat(field, rows)
    x = A.solve(rhs)
    if x is None:
        return None
    g = MPoly(field, nloc, {e: c for e, c in zip(cands, x) if c})
    if g.is_zero():
        return None
    g = g.normalized_grlex()
    # verify g^w proportional to det(Yloc) at random points
    c = None
    for _ in range(25):
        a = rng.vector(field, nloc)
        gv = pow(g.eval(a), w, p)
        dv = detval(a)
        if gv == 0:
            if dv != 0:
                return None
            continue
        if c is None:
            c = field.div(dv, gv)
        elif dv != field.mul(c, gv):
            return None
    return g if c is not None else None


# ---------------------------------------------------------------------------
# intertwiners and Kronecker factorization
# ---------------------------------------------------------------------------

def intertwiner_space(Y: LinMat, Z: LinMat) -> list[tuple[Mat, Mat]]:
    """Basis of the space of pairs (T, S) with T.Y(x) = Z(x).S identically.

    Coefficient matching per variable yields n * W^2 linear equations in
    the 2 W^2 unknowns of T and S.
    """
    field = Y.field
    W = Y.nrows
    n = Y.n
    rows = []
    for v in range(n):
        Yv = [[Y.coeffs[u][j][v] for j in range(W)] for u in range(W)]
        Zv = [[Z.coeffs[u][j][v] for j in range(W)] for u in range(W)]
        for i in range(W):
            for j in range(W):
                row = [0] * (2 * W * W)
                for u in range(W):
                    if Yv[u][j]:
                        row[i * W + u] = Yv[u][j]
                    if Zv[i][u]:
                        row[W * W + u * W + j] = (row[W * W + u * W + j] - Zv[i][u]) % field.p
                if any(row):
                    rows.append(row)
    kernel = nullspace_rows(field, rows) if rows else []
    out = []
    for vec in kernel:
        T = Mat(field, [[vec[i * W + u] for u in range(W)] for i in range(W)])
        S = Mat(field, [[vec[W * W + u * W + j] for j in range(W)] for u in range(W)])
        out.append((T, S))
    return out


def solve_intertwiner(Y: LinMat, Z: LinMat, rng: Rng, attempts: int = 3):
    """(T', S', transposed) with T'.Y = Z.S' or T'.Y = Z^T.S', both
    invertible, sampled from the solution space; None when neither or both
    branches admit nonzero solutions."""
    plain = intertwiner_space(Y, Z)
    trans = intertwiner_space(Y, Z.transpose())
    if bool(plain) == bool(trans):
        return None
    space = plain or trans
    transposed = not plain
    pair = _sample_invertible_pair(space, rng, attempts)
    if pair is None:
        return None
    return pair[0], pair[1], transposed


def _sample_invertible_pair(space, rng: Rng, attempts: int):
    field = space[0][0].field
    for _ in range(attempts):
        T = Mat.zeros(field, space[0][0].nrows, space[0][0].ncols)
        S = Mat.zeros(field, space[0][1].nrows, space[0][1].ncols)
        for Tb, Sb in space:
            c = rng.scalar(field)
            T = T + Tb.scale(c)
            S = S + Sb.scale(c)
        if T.is_invertible() and S.is_invertible():
            return T, S
    return None


def factor_kron(Yhat: LinMat, w: int):
    """Split Yhat = (M (x) I_w) . (I_w (x) X) = M (x) X into (M, X).

    The first nonzero w x w block is taken as X (its grid coefficient
    normalized to one); every other block must be an exact scalar multiple.
    Raises StructureViolation otherwise or when M is singular.
    """
    field = Yhat.field
    W = Yhat.nrows
    if W != w * w or Yhat.ncols != W:
        raise StructureViolation("expected a w^2 x w^2 layer")

    def block(a, b):
        out = LinMat(field, w, w, Yhat.n)
        for i in range(w):
            for j in range(w):
                out.coeffs[i][j] = list(Yhat.coeffs[a * w + i][b * w + j])
        return out

    X = None
    ref = None
    for a in range(w):
        for b in range(w):
            blk = block(a, b)
            pos = next(
                ((i, j, v) for i in range(w) for j in range(w)
                 for v, c in enumerate(blk.coeffs[i][j]) if c),
                None,
            )
            if pos is not None:
                X = blk
                ref = pos
                break
        if X is not None:
            break
    if X is None:
        raise StructureViolation("zero layer")
    i0, j0, v0 = ref
    base = X.coeffs[i0][j0][v0]
    inv = field.inv(base)
    M = Mat.zeros(field, w, w)
    for a in range(w):
        for b in range(w):
            blk = block(a, b)
            m = blk.coeffs[i0][j0][v0] * inv % field.p
            M.rows[a][b] = m
            if blk != X.scale(m):
                raise StructureViolation("blocks are not scalar multiples")
    if not M.is_invertible():
        raise StructureViolation("Kronecker factor is singular")
    return M, X


def _extract_identity_kron(Yhat: LinMat, w: int) -> LinMat | None:
    """X with Yhat == I_w (x) X, or None."""
    field = Yhat.field
    X = LinMat(field, w, w, Yhat.n)
    for i in range(w):
        for j in range(w):
            X.coeffs[i][j] = list(Yhat.coeffs[i][j])
            X.const[i][j] = Yhat.const[i][j]
    zero = [0] * Yhat.n
    for a in range(w):
        for b in range(w):
            for i in range(w):
                for j in range(w):
                    want = X.coeffs[i][j] if a == b else zero
                    if Yhat.coeffs[a * w + i][b * w + j] != want:
                        return None
    return X


def _kron_id(X: LinMat, w: int) -> LinMat:
    """I_w (x) X as a linear matrix."""
    W = w * X.nrows
    out = LinMat(X.field, W, W, X.n)
    for a in range(w):
        for i in range(X.nrows):
            for j in range(X.ncols):
                out.coeffs[a * X.nrows + i][a * X.ncols + j] = list(X.coeffs[i][j])
    return out


# ---------------------------------------------------------------------------
# Reduction from tensor isomorphism to the determinant oracle
# ---------------------------------------------------------------------------

def tensor_iso_to_det(
    h: Blackbox,
    w: int,
    d: int,
    det_oracle,
    rng: Rng,
    report=None,
    certify_trials: int = 40,
):
    """Per-block transformations B_0..B_{d-1} with
    h = Tr-IMM(B_0 x_0, ..., B_{d-1} x_{d-1}), or None.

    Reconstruct a width-w^2 ABP; extract the w-th root of each middle
    layer's determinant and hand it to the DET oracle; align the layers to
    I (x) X' via intertwiners (the transpose branch, when it fires, fires
    globally and is absorbed by transposing the oracle answers); factor
    the Kronecker structure; read off the first and last layers; certify.
    """
    field = h.field
    shape = TrimmShape(w, d)
    w2 = w * w
    if h.n != w2 * d:
        _fail(report, "tensor-arity")
        return None
    blocks = [shape.block_vars(k) for k in range(d)]
    try:
        abp = reconstruct_abp(h, blocks, w2, rng)
    except (AnchorSingular, CertificationFailed):
        _fail(report, "abp-reconstruction")
        return None
    _gate(report, "abp-reconstruction")
    Y = abp.layers

    spaces: dict[int, list] = {}
    for k in range(1, d - 1):
        Yloc = _localize(Y[k], blocks[k])
        g_k = _layer_det_root(Yloc, w, rng)
        if g_k is None:
            _fail(report, "layer-det")
            return None
        ans = det_oracle(g_k, rng)
        if ans is None:
            _fail(report, "det-oracle")
            return None
        Z = _kron_id(ans, w)
        plain = intertwiner_space(Yloc, Z)
        trans = intertwiner_space(Yloc, Z.transpose())
        if bool(plain) == bool(trans):
            # exactly one branch can admit nonzero solutions for a genuine
            # trace-product layer; both or neither means reject
            _fail(report, "intertwiner")
            return None
        # A transposed branch is the plain branch for the transposed oracle
        # answer (Z^T = I (x) X'^T and determinants ignore transposition),
        # so it is absorbed layer by layer: the solutions already satisfy
        # T'.Y' = (I (x) X~).S' for the absorbed X~.
        spaces[k] = plain or trans
    _gate(report, "det-oracle")
    _gate(report, "intertwiner")

    Tp: dict[int, Mat] = {}
    Sp: dict[int, Mat] = {}
    for k in range(1, d - 1):
        pair = _sample_invertible_pair(spaces[k], rng, 3)
        if pair is None:
            _fail(report, "intertwiner-sampling")
            return None
        Tp[k - 1], Sp[k] = pair

    Yhat: dict[int, LinMat] = {}
    Yhat[0] = Y[0].right_mul(Tp[0].inverse())
    for k in range(1, d - 2):  # k in [1, d-3]
        Yhat[k] = Y[k].left_mul(Tp[k - 1]).right_mul(Tp[k].inverse())
    Yhat[d - 2] = Y[d - 2].left_mul(Tp[d - 3]).right_mul(Sp[d - 2].inverse())
    Yhat[d - 1] = Y[d - 1].left_mul(Sp[d - 2])

    Xhat: dict[int, LinMat] = {}
    X_mid = _extract_identity_kron(Yhat[d - 2], w)
    if X_mid is None:
        _fail(report, "kron-structure")
        return None
    Xhat[d - 2] = X_mid
    prod_M = Mat.identity(field, w)
    try:
        for k in range(1, d - 2):
            Mk, Xk = factor_kron(Yhat[k], w)
            Xhat[k] = Xk
            prod_M = prod_M * Mk
    except StructureViolation:
        _fail(report, "kron-structure")
        return None
    _gate(report, "kron-structure")
    Ybar = Yhat[d - 1].left_mul(kron(prod_M, Mat.identity(field, w)))

    X0 = LinMat(field, w, w, h.n)
    Xd = LinMat(field, w, w, h.n)
    for i in range(w):
        for j in range(w):
            X0.coeffs[i][j] = list(Yhat[0].coeffs[0][i * w + j])
            Xd.coeffs[i][j] = list(Ybar.coeffs[j * w + i][0])
    Xhat[0] = X0
    Xhat[d - 1] = Xd

    Bs = []
    for k in range(d):
        Bk = Mat.zeros(field, w2, w2)
        for i in range(w):
            for j in range(w):
                pos = i * w + j if k % 2 == 0 else j * w + i
                Bk.rows[pos] = [Xhat[k].coeffs[i][j][v] for v in blocks[k]]
        if not Bk.is_invertible():
            _fail(report, "witness-invertible")
            return None
        Bs.append(Bk)
    composed = ComposedBlackbox(trimm_blackbox(field, shape), assemble_block_diagonal(Bs))
    if not pit_equal(h, composed, certify_trials, rng):
        _fail(report, "final-pit")
        return None
    _gate(report, "final-pit")
    return Bs


def trace_equivalence(
    f: Blackbox,
    d: int,
    det_provider,
    rng: Rng,
    report=None,
    final_trials: int = 20,
):
    """Full pipeline: blackbox f -> (w, A) with f = Tr-IMM_{w,d}(A.x).

    det_provider maps a width w to a DET oracle for that width (or None if
    unavailable).  Oracles exposing observe_tensor_map are notified of the
    computed tensor-stage basis change first (planted test oracles use
    this to derive their registry).  Returns None for "no such w exists".
    """
    field = f.field
    stage1 = trace_to_tensor_iso(f, d, rng, report=report)
    if stage1 is None:
        return None
    A_prime, w = stage1
    det_oracle = det_provider(w) if callable(det_provider) else det_provider
    if det_oracle is None:
        _fail(report, "det-oracle-unavailable")
        return None
    observe = getattr(det_oracle, "observe_tensor_map", None)
    if observe is not None:
        observe(A_prime)
    h = ComposedBlackbox(f, A_prime)
    Bs = tensor_iso_to_det(h, w, d, det_oracle, rng, report=report)
    if Bs is None:
        return None
    A = assemble_block_diagonal(Bs) * A_prime.inverse()
    shape = TrimmShape(w, d)
    target = ComposedBlackbox(trimm_blackbox(field, shape), A)
    if not pit_equal(f, target, final_trials, rng):
        _fail(report, "final-pit")
        return None
    _gate(report, "certified")
    return w, A
