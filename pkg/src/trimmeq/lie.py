"""Lie algebra of a polynomial and its irreducible invariant subspaces.

The Lie algebra of f is the space of matrices E with
sum_{i,j} E[i][j] * x_j * df/dx_i == 0.  A basis is found either by
sampling that identity at random points (blackbox access) or by exact
coefficient matching (explicit polynomials).  On top of it sit random
elements, vector closures, and the invariant-subspace search that drives
the reduction to tensor isomorphism.
"""

from __future__ import annotations

import numpy as np

from .errors import CertificationFailed
from .field import Fp, Rng
from .linalg import (
    Mat,
    in_span,
    nullspace_rows,
    poly_at_matrix,
    same_span,
)
from .poly import Blackbox, ExplicitBlackbox, factor_univariate, squarefree_test


class LieBasis:
    """Basis F_1..F_a of the Lie algebra of some polynomial."""

    __slots__ = ("field", "n", "basis")

    def __init__(self, field: Fp, n: int, basis: list[Mat]):
        self.field = field
        self.n = n
        self.basis = basis

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, M: Mat) -> bool:
        vecs = [B.flatten() for B in self.basis]
        return in_span(self.field, vecs, M.flatten())

    def same_span_as(self, other: "LieBasis") -> bool:
        return same_span(
            self.field,
            [B.flatten() for B in self.basis],
            [B.flatten() for B in other.basis],
        )


class InvariantSubspace:
    """Subspace closed under every element of a Lie basis."""

    __slots__ = ("field", "basis")

    def __init__(self, field: Fp, basis: list[list[int]]):
        self.field = field
        self.basis = basis

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: list[int]) -> bool:
        return in_span(self.field, self.basis, v)

    def same_as(self, other: "InvariantSubspace") -> bool:
        return same_span(self.field, self.basis, other.basis)


def _lie_rows_sampled(f: Blackbox, m: int, rng: Rng):
    """m rows of the sampled constraint system over the n^2 unknowns E[i][j].

    Row for point a is the flattened outer product grad_f(a) (x) a, since
    sum_ij E_ij a_j d_i f(a) = grad(a)^T E a.
    """
    field = f.field
    n = f.n
    if field.kernel is not None:
        pts = rng.array(field, (m, n))
        grads = f.gradient_many(pts)
        k = field.kernel
        rows = k.mul(grads[:, :, None], pts[:, None, :]).reshape(m, n * n)
        return rows, pts
    rows = []
    pts = []
    for _ in range(m):
        a = rng.vector(field, n)
        g = f.gradient(a)
        p = field.p
        rows.append([gi * aj % p for gi in g for aj in a])
        pts.append(a)
    return rows, pts


def _certify_element(f: Blackbox, E: Mat, trials: int, rng: Rng) -> bool:
    """PIT of the Lie polynomial of E against zero at fresh points."""
    field = f.field
    n = f.n
    if field.kernel is not None:
        pts = rng.array(field, (trials, n))
        grads = f.gradient_many(pts)
        k = field.kernel
        En = E.to_numpy()
        Ea = k.matmul(pts, En.T)  # rows: E.a
        acc = np.zeros(trials, dtype=np.int64)
        for i in range(n):
            acc = k.add(acc, k.mul(grads[:, i], Ea[:, i]))
        return not np.any(acc)
    p = field.p
    for _ in range(trials):
        a = rng.vector(field, n)
        g = f.gradient(a)
        Ea = E.matvec(a)
        if sum(gi * yi for gi, yi in zip(g, Ea)) % p != 0:
            return False
    return True


def lie_algebra_basis(
    f: Blackbox,
    rng: Rng,
    mode: str = "sampled",
    certify_trials: int = 20,
) -> LieBasis:
    """Basis of the Lie algebra of f.

    sampled: build an (n^2 + 32)-row random constraint system, take its
    nullspace, then certify every basis element by PIT at fresh points;
    raises CertificationFailed if any element fails (the caller may retry
    with more rows).  exact: coefficient matching on an explicit
    polynomial; both return the same span w.h.p.
    """
    n = f.n
    field = f.field
    if mode == "exact":
        if not isinstance(f, ExplicitBlackbox):
            raise TypeError("exact mode needs an ExplicitBlackbox")
        return _lie_basis_exact(f)
    m = n * n + 32
    attempt_rows = m
    for _ in range(2):
        rows, _ = _lie_rows_sampled(f, attempt_rows, rng)
        kernel = nullspace_rows(field, rows)
        basis = [Mat(field, [[int(v[i * n + j]) for j in range(n)] for i in range(n)])
                 for v in kernel]
        if all(_certify_element(f, E, certify_trials, rng) for E in basis):
            return LieBasis(field, n, basis)
        attempt_rows *= 2
    raise CertificationFailed("sampled Lie basis failed identity certification")


def _lie_basis_exact(f: ExplicitBlackbox) -> LieBasis:
    field = f.field
    n = f.n
    p = field.p
    rows: dict[tuple, list[int]] = {}
    for e, c in f.poly.terms.items():
        for i in range(n):
            if not e[i]:
                continue
            dc = c * e[i] % p
            for j in range(n):
                mu = list(e)
                mu[i] -= 1
                mu[j] += 1
                key = tuple(mu)
                row = rows.get(key)
                if row is None:
                    row = rows[key] = [0] * (n * n)
                row[i * n + j] = (row[i * n + j] + dc) % p
    kernel = nullspace_rows(field, list(rows.values()))
    basis = [Mat(field, [[v[i * n + j] for j in range(n)] for i in range(n)]) for v in kernel]
    return LieBasis(field, n, basis)


def random_element(L: LieBasis, rng: Rng) -> Mat:
    """Uniform random combination of the basis (coefficients from all of F_p)."""
    field = L.field
    out = Mat.zeros(field, L.n, L.n)
    for F in L.basis:
        out = out + F.scale(rng.scalar(field))
    return out


def closure(v: list[int], L: LieBasis) -> InvariantSubspace:
    """Smallest L-invariant subspace containing v (span-growth to fixpoint)."""
    from .linalg import SpanAccumulator

    field = L.field
    acc = SpanAccumulator(field, L.n)
    acc.add(v)
    basis = [list(v)]
    frontier = [list(v)]
    while frontier:
        new_frontier = []
        for u in frontier:
            for F in L.basis:
                cand = F.matvec(u)
                if acc.add(cand):
                    basis.append(cand)
                    new_frontier.append(cand)
        frontier = new_frontier
    return InvariantSubspace(field, basis)


def is_invariant(space: InvariantSubspace, L: LieBasis) -> bool:
    return all(
        in_span(space.field, space.basis, F.matvec(b))
        for F in L.basis
        for b in space.basis
    )


class Reject:
    """A 'No' answer carrying the failing gate name."""

    def __init__(self, gate: str):
        self.gate = gate

    def __repr__(self):
        return f"Reject({self.gate!r})"


def irreducible_invariant_subspaces(
    f: Blackbox,
    rng: Rng,
    expected_count: int | None = None,
    retries: int = 3,
):
    """The irreducible invariant subspaces of the Lie algebra of f.

    Basis, random element, characteristic polynomial, square-free gate,
    factor, null spaces of the factors at the element, closures of one
    vector each, dedup.  Rejects unless exactly d distinct spaces of equal
    dimension come out (d = expected_count, default the polynomial degree).
    The whole procedure retries on square-free or certification failures,
    since its guarantees are only with high probability.
    """
    d = expected_count if expected_count is not None else f.degree
    last = Reject("square-free")
    for _ in range(retries):
        out = _invariant_subspaces_once(f, rng, d)
        if not isinstance(out, Reject):
            return out
        last = out
        if out.gate not in ("square-free", "certification"):
            return out  # structural rejection, retrying cannot help
    return last


def _invariant_subspaces_once(f: Blackbox, rng: Rng, d: int):
    field = f.field
    try:
        L = lie_algebra_basis(f, rng)
    except CertificationFailed:
        return Reject("certification")
    if L.dim == 0:
        return Reject("empty-basis")
    R = random_element(L, rng)
    q = R.charpoly()
    if not squarefree_test(field, q):
        return Reject("square-free")
    factors = factor_univariate(field, q, rng)
    spaces: list[InvariantSubspace] = []
    for p_i, _ in factors:
        N = poly_at_matrix(p_i, R)
        null = N.nullspace()
        if not null:
            return Reject("factor-nullspace")
        space = closure(null[0], L)
        if not any(space.same_as(s) for s in spaces):
            spaces.append(space)
    if len(spaces) != d:
        return Reject("subspace-count")
    dims = {s.dim for s in spaces}
    if len(dims) != 1:
        return Reject("subspace-dims")
    if not all(is_invariant(s, L) for s in spaces):
        return Reject("invariance")
    return spaces
