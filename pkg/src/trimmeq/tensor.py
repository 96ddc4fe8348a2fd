"""Degree reduction: d-tensor isomorphism via the d = 3 oracle.

A random restriction of the last d-3 blocks turns the input into a
3-tensor handled by the matrix-multiplication-tensor oracle; the first
three layer matrices then let unit points be solved (points at which a
layer evaluates to a matrix unit), and the remaining layers are read off
entry by entry through structured blackbox queries.  d = 4 needs only the
direct read-off; d >= 5 reconstructs a width-w suffix ABP first.
"""

from __future__ import annotations

from .abp import reconstruct_abp
from .errors import AnchorSingular, CertificationFailed, Singular
from .field import Fp, Rng
from .linalg import Mat, assemble_block_diagonal, solve_linear
from .poly import Blackbox, ComposedBlackbox, LinMat, RestrictionBlackbox, pit_equal
from .report import _fail, _gate
from .trimm import TrimmShape, trimm_blackbox


def linmat_from_block_transform(field: Fp, B: Mat, w: int, k_parity: int) -> LinMat:
    """The w x w linear matrix over w^2 local variables encoded by B.

    Row r of B holds the coefficients of the (i, j) entry sitting at
    within-block position r (row-major for even layers, column-major for
    odd ones)."""
    X = LinMat(field, w, w, w * w)
    for i in range(w):
        for j in range(w):
            pos = i * w + j if k_parity % 2 == 0 else j * w + i
            X.coeffs[i][j] = list(B.rows[pos])
    return X


def unit_point(Xp: LinMat, i: int, j: int) -> list[int]:
    """b with Xp(b) equal to the (i, j) matrix unit (i, j zero-based).

    Solves the w^2 x w^2 coefficient system; Singular when the entry forms
    are dependent (a broken upstream invariant)."""
    w = Xp.nrows
    C = Mat(Xp.field, [list(Xp.coeffs[u][v]) for u in range(w) for v in range(w)])
    rhs = [0] * (w * w)
    rhs[i * w + j] = 1
    b = C.solve(rhs)
    if b is None or not C.is_invertible():
        raise Singular("layer linear forms are dependent")
    return b


def _unit_points_all(Xp: LinMat) -> list[list[list[int]]]:
    """unit[i][j] for all positions, from one matrix inversion."""
    w = Xp.nrows
    C = Mat(Xp.field, [list(Xp.coeffs[u][v]) for u in range(w) for v in range(w)])
    if not C.is_invertible():
        raise Singular("layer linear forms are dependent")
    Cinv = C.inverse()
    cols = Cinv.transpose().rows  # column t of Cinv = solution for unit t
    return [[list(cols[i * w + j]) for j in range(w)] for i in range(w)]


def _entry_linear_form(f: Blackbox, template: list[int], block: list[int], rng: Rng):
    """Coefficients of the linear form x_block -> f(template | block = x),
    with a random two-point collinearity check."""
    field = f.field
    p = field.p
    base = list(template)
    for v in block:
        base[v] = 0
    if f.eval(base) != 0:
        return None
    coeffs = []
    for v in block:
        q = list(base)
        q[v] = 1
        coeffs.append(f.eval(q))
    r1 = rng.vector(field, len(block))
    r2 = rng.vector(field, len(block))
    q1, q2, q12 = list(base), list(base), list(base)
    for v, a, b in zip(block, r1, r2):
        q1[v] = a
        q2[v] = b
        q12[v] = (a + b) % p
    if (f.eval(q1) + f.eval(q2)) % p != f.eval(q12):
        return None
    lin = sum(c * a for c, a in zip(coeffs, r1)) % p
    if lin != f.eval(q1):
        return None
    return coeffs


def degree_d_to_3(
    f: Blackbox,
    w: int,
    d: int,
    mmti,
    rng: Rng,
    report=None,
    final_trials: int = 40,
):
    """B_0..B_{d-1} with f = Tr-IMM_{w,d}(B_0 x_0, ...), via the MMTI oracle.

    mmti is a callable (3-tensor blackbox, w, rng) -> [B_0, B_1, B_2] | None.
    One resample of the restriction points on failure, then None.
    """
    field = f.field
    shape = TrimmShape(w, d)
    if f.n != shape.n:
        _fail(report, "tensor-arity")
        return None
    if d == 3:
        return mmti(f, w, rng)
    for _ in range(2):
        Bs = _degree_reduce_once(f, w, d, mmti, rng, report, final_trials)
        if Bs is not None:
            return Bs
    return None


def _degree_reduce_once(f, w, d, mmti, rng, report, final_trials):
    field = f.field
    shape = TrimmShape(w, d)
    w2 = w * w
    blocks = [shape.block_vars(k) for k in range(d)]

    template = [0] * f.n
    for k in range(3, d):
        for v in blocks[k]:
            template[v] = rng.scalar(field)
    h = RestrictionBlackbox(f, template, blocks[0] + blocks[1] + blocks[2])
    h.degree = 3
    first = mmti(h, w, rng)
    if first is None:
        _fail(report, "mmti-oracle")
        return None
    _gate(report, "mmti-oracle")
    B012 = first
    Xp = {k: linmat_from_block_transform(field, B012[k], w, k) for k in range(3)}
    try:
        units = {k: _unit_points_all(Xp[k]) for k in range(3)}
    except Singular:
        _fail(report, "unit-points")
        return None

    def put(point, k, local_vals):
        for v, x in zip(blocks[k], local_vals):
            point[v] = x % field.p

    if d == 4:
        X3 = LinMat(field, w, w, w2)
        for i in range(w):
            for j in range(w):
                t = [0] * f.n
                put(t, 0, units[0][j][0])
                put(t, 1, units[1][0][0])
                put(t, 2, units[2][0][i])
                form = _entry_linear_form(f, t, blocks[3], rng)
                if form is None:
                    _fail(report, "entry-linearity")
                    return None
                X3.coeffs[i][j] = form
        layer_mats = {3: X3}
    else:
        # suffix ABP of the (1,1)-pinned restriction over blocks 3..d-1
        t = [0] * f.n
        put(t, 0, units[0][0][0])
        put(t, 1, units[1][0][0])
        put(t, 2, units[2][0][0])
        free = [v for k in range(3, d) for v in blocks[k]]
        g = RestrictionBlackbox(f, t, free)
        g.degree = d - 3
        g_blocks = [list(range(s * w2, (s + 1) * w2)) for s in range(d - 3)]
        try:
            suffix = reconstruct_abp(g, g_blocks, w, rng)
        except (AnchorSingular, CertificationFailed):
            _fail(report, "suffix-abp")
            return None
        _gate(report, "suffix-abp")
        layer_mats = {}
        units_suffix = {}
        for k in range(4, d - 1):
            # suffix layer k-3 is the w x w layer in f-block k
            L = suffix.layers[k - 3]
            Xk = LinMat(field, w, w, w2)
            for i in range(w):
                for j in range(w):
                    Xk.coeffs[i][j] = [L.coeffs[i][j][v] for v in g_blocks[k - 3]]
            layer_mats[k] = Xk
            try:
                units_suffix[k] = _unit_points_all(Xk)
            except Singular:
                _fail(report, "unit-points")
                return None
        # last suffix layer: w x 1 column; b_j with Y(b_j) = e_j
        last = suffix.layers[d - 1 - 3]
        A_last = Mat(field, [
            [last.coeffs[u][0][v] for v in g_blocks[d - 1 - 3]] for u in range(w)
        ])
        b_last = []
        for j in range(w):
            rhs = [1 if u == j else 0 for u in range(w)]
            sol = solve_linear(A_last, rhs)
            if sol is None:
                _fail(report, "unit-points")
                return None
            b_last.append(sol[0])

        X3 = LinMat(field, w, w, w2)
        for i in range(w):
            for j in range(w):
                t = [0] * f.n
                put(t, 0, units[0][0][0])
                put(t, 1, units[1][0][0])
                put(t, 2, units[2][0][i])
                for k in range(4, d - 1):
                    put(t, k, units_suffix[k][j][j])
                put(t, d - 1, b_last[j])
                form = _entry_linear_form(f, t, blocks[3], rng)
                if form is None:
                    _fail(report, "entry-linearity")
                    return None
                X3.coeffs[i][j] = form
        layer_mats[3] = X3
        try:
            units3 = _unit_points_all(X3)
        except Singular:
            _fail(report, "unit-points")
            return None

        Xlast = LinMat(field, w, w, w2)
        for i in range(w):
            for j in range(w):
                t = [0] * f.n
                put(t, 0, units[0][j][0])
                put(t, 1, units[1][0][0])
                put(t, 2, units[2][0][0])
                put(t, 3, units3[0][0])
                for k in range(4, d - 2):
                    put(t, k, units_suffix[k][0][0])
                if d - 2 >= 4:
                    put(t, d - 2, units_suffix[d - 2][0][i])
                else:
                    put(t, d - 2, units3[0][i])
                form = _entry_linear_form(f, t, blocks[d - 1], rng)
                if form is None:
                    _fail(report, "entry-linearity")
                    return None
                Xlast.coeffs[i][j] = form
        layer_mats[d - 1] = Xlast

    Bs = list(B012)
    for k in range(3, d):
        Bk = Mat.zeros(field, w2, w2)
        for i in range(w):
            for j in range(w):
                pos = i * w + j if k % 2 == 0 else j * w + i
                Bk.rows[pos] = list(layer_mats[k].coeffs[i][j])
        if not Bk.is_invertible():
            _fail(report, "witness-invertible")
            return None
        Bs.append(Bk)
    composed = ComposedBlackbox(trimm_blackbox(field, shape), assemble_block_diagonal(Bs))
    if not pit_equal(f, composed, final_trials, rng):
        _fail(report, "final-pit")
        return None
    _gate(report, "final-pit")
    return Bs
