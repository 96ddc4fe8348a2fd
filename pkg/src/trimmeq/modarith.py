"""Vectorized arithmetic kernels for prime fields that fit in int64.

Two fast lanes are provided:

* ``M61Kernel`` -- the default modulus 2^61 - 1 (Mersenne).  Products are
  computed limb-wise in int64 (31/30-bit splits) and reduced with shifts,
  so a full multiply costs ~25 elementwise numpy ops and never overflows
  a signed 64-bit intermediate.
* ``SmallKernel`` -- any p < 2^31, where ``a * b`` of canonical residues
  fits in int64 directly.

Everything here operates on canonical residues in [0, p) stored as
``numpy.int64``.  Callers with moduli outside both lanes fall back to the
pure-Python routines in :mod:`trimmeq.linalg`.
"""

from __future__ import annotations

import numpy as np

M61 = (1 << 61) - 1
_MASK31 = (1 << 31) - 1
_MASK30 = (1 << 30) - 1
_MASK61 = (1 << 61) - 1


class _KernelBase:
    """Shared batched linear algebra built on top of mul/add/sub."""

    p: int

    # -- elementwise ops (implemented by subclasses) --------------------
    def mul(self, a, b):  # pragma: no cover - abstract
        raise NotImplementedError

    def add(self, a, b):
        r = a + b - self.p
        return r + ((r >> 63) & self.p)

    def sub(self, a, b):
        r = a - b
        return r + ((r >> 63) & self.p)

    def neg(self, a):
        return np.where(a == 0, a, self.p - a)

    def inv_scalar(self, a: int) -> int:
        return pow(a, self.p - 2, self.p)

    def asarray(self, rows) -> np.ndarray:
        return np.array(rows, dtype=np.int64)

    # -- batched helpers -------------------------------------------------
    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """(m,k) x (k,n) product; accumulates one rank-1 term at a time."""
        m, k = A.shape
        k2, n = B.shape
        assert k == k2
        C = np.zeros((m, n), dtype=np.int64)
        for t in range(k):
            C = self.add(C, self.mul(A[:, t : t + 1], B[t : t + 1, :]))
        return C

    def rref(self, M: np.ndarray):
        """Fully reduced row echelon form.  Returns (R, pivot_columns)."""
        R = M.astype(np.int64, copy=True)
        m, n = R.shape
        pivots = []
        r = 0
        for c in range(n):
            if r == m:
                break
            nz = np.nonzero(R[r:, c])[0]
            if nz.size == 0:
                continue
            pr = r + int(nz[0])
            if pr != r:
                R[[r, pr]] = R[[pr, r]]
            inv = self.inv_scalar(int(R[r, c]))
            R[r, c:] = self.mul(R[r, c:], inv)
            if r + 1 < m:
                f = R[r + 1 :, c]
                R[r + 1 :, c:] = self.sub(
                    R[r + 1 :, c:], self.mul(f[:, None], R[r, c:][None, :])
                )
            pivots.append(c)
            r += 1
        # eliminate above pivots, bottom-up
        for i in range(len(pivots) - 1, 0, -1):
            c = pivots[i]
            f = R[:i, c]
            if np.any(f):
                R[:i, c:] = self.sub(R[:i, c:], self.mul(f[:, None], R[i, c:][None, :]))
        return R, pivots

    def nullspace(self, M: np.ndarray):
        """Kernel basis vectors (list of int64 arrays of length n).

        Avoids the full RREF back-pass: after forward elimination only the
        free columns are back-substituted, which is what dominates on the
        (n^2+32) x n^2 systems this package solves.
        """
        R = M.astype(np.int64, copy=True)
        m, n = R.shape
        pivots = []
        r = 0
        for c in range(n):
            if r == m:
                break
            nz = np.nonzero(R[r:, c])[0]
            if nz.size == 0:
                continue
            pr = r + int(nz[0])
            if pr != r:
                R[[r, pr]] = R[[pr, r]]
            inv = self.inv_scalar(int(R[r, c]))
            R[r, c:] = self.mul(R[r, c:], inv)
            if r + 1 < m:
                f = R[r + 1 :, c]
                R[r + 1 :, c:] = self.sub(
                    R[r + 1 :, c:], self.mul(f[:, None], R[r, c:][None, :])
                )
            pivots.append(c)
            r += 1
        rank = len(pivots)
        free = [c for c in range(n) if c not in set(pivots)]
        if not free:
            return []
        F = R[:rank, free].copy()  # rank x nfree
        # back-substitute pivot columns bottom-up; updates touch free cols only
        for i in range(rank - 1, 0, -1):
            c = pivots[i]
            f = R[:i, c]
            if np.any(f):
                F[:i] = self.sub(F[:i], self.mul(f[:, None], F[i][None, :]))
        basis = []
        for t, fc in enumerate(free):
            v = np.zeros(n, dtype=np.int64)
            v[fc] = 1
            col = F[:, t]
            v[pivots] = np.where(col == 0, 0, self.p - col)
            basis.append(v)
        return basis

    def rank(self, M: np.ndarray) -> int:
        R = M.astype(np.int64, copy=True)
        m, n = R.shape
        r = 0
        for c in range(n):
            if r == m:
                break
            nz = np.nonzero(R[r:, c])[0]
            if nz.size == 0:
                continue
            pr = r + int(nz[0])
            if pr != r:
                R[[r, pr]] = R[[pr, r]]
            inv = self.inv_scalar(int(R[r, c]))
            R[r, c:] = self.mul(R[r, c:], inv)
            if r + 1 < m:
                f = R[r + 1 :, c]
                R[r + 1 :, c:] = self.sub(
                    R[r + 1 :, c:], self.mul(f[:, None], R[r, c:][None, :])
                )
            r += 1
        return r

    def det(self, M: np.ndarray) -> int:
        R = M.astype(np.int64, copy=True)
        n = R.shape[0]
        d = 1
        for c in range(n):
            nz = np.nonzero(R[c:, c])[0]
            if nz.size == 0:
                return 0
            pr = c + int(nz[0])
            if pr != c:
                R[[c, pr]] = R[[pr, c]]
                d = self.p - d
            piv = int(R[c, c])
            d = (d * piv) % self.p
            inv = self.inv_scalar(piv)
            R[c, c:] = self.mul(R[c, c:], inv)
            if c + 1 < n:
                f = R[c + 1 :, c]
                R[c + 1 :, c:] = self.sub(
                    R[c + 1 :, c:], self.mul(f[:, None], R[c, c:][None, :])
                )
        return d % self.p


class M61Kernel(_KernelBase):
    """Limb-split multiply mod the Mersenne prime 2^61 - 1."""

    def __init__(self):
        self.p = M61

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        a1 = a >> 31
        a0 = a & _MASK31
        b1 = b >> 31
        b0 = b & _MASK31
        h = a1 * b1                      # < 2^60
        m = a1 * b0 + a0 * b1            # < 2^62
        l = a0 * b0                      # < 2^62
        l = (l >> 61) + (l & _MASK61)
        # a*b = h*2^62 + m*2^31 + l;  2^61 == 1 (mod p)
        t = 2 * h + (m >> 30) + ((m & _MASK30) << 31) + l
        t = (t >> 61) + (t & _MASK61)
        t = t - M61
        return t + ((t >> 63) & M61)


class SmallKernel(_KernelBase):
    """Direct int64 multiply for p < 2^31."""

    def __init__(self, p: int):
        self.p = p

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return (a * b) % self.p


_M61_SINGLETON = M61Kernel()


def get_kernel(p: int):
    """Return a vectorized kernel for p, or None if no fast lane applies."""
    if p == M61:
        return _M61_SINGLETON
    if 2 < p < (1 << 31):
        return SmallKernel(p)
    return None
