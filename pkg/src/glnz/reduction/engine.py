"""Gram-matrix reduction state shared by LLL and BKZ.

The exact Gram matrix ``G`` and transform ``U`` are object arrays of Python
ints and are only ever changed by unimodular row operations, so
``U @ G_in @ U.T == G`` holds exactly at all times. Gram-Schmidt data lives
in float64 and drives the fast L2-style loop; :meth:`GramReducer.certify`
then runs the integral LLL of de Weger/Cohen on the exact data, which both
proves the LLL conditions and repairs whatever the float pass left behind.
"""

from __future__ import annotations

import time
from fractions import Fraction

import numpy as np
from scipy.linalg.blas import dtrsv

from glnz.linalg import IntegerMatrix, identity
from glnz.reduction import _kernel

ETA = 0.51
# machine-int storage is used while every intermediate stays below this
INT64_ROOM = 1 << 62
MAX_SIZE_REDUCTION_PASSES = 200
STALL_LIMIT = 8
# compiled-loop iterations between deadline checks
KERNEL_BUDGET = 1 << 14
# Gram matrices with a diagonal entry at or above this go through coarse rounds
COARSE_THRESHOLD = 1 << 50
# bit size of the largest entry of a truncated Gram in a coarse round
COARSE_BITS = 40


class NotPositiveDefinite(ValueError):
    pass


class ReductionTimeout(RuntimeError):
    pass


class FloatFailure(RuntimeError):
    """Float Gram-Schmidt lost too much precision; exact arithmetic takes over."""


def as_gram(G) -> IntegerMatrix:
    G = np.array(G, dtype=object)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {G.shape}")
    G = np.vectorize(int, otypes=[object])(G) if G.size else G
    if not (G == G.T).all():
        raise ValueError("Gram matrix must be symmetric")
    return G


def delta_fraction(delta: float | Fraction) -> Fraction:
    d = Fraction(str(delta)) if isinstance(delta, float) else Fraction(delta)
    if not Fraction(1, 4) < d < 1:
        raise ValueError(f"delta must lie in (1/4, 1), got {delta}")
    return d


class GramReducer:
    """Reduction state. ``G`` and ``U`` are int64 arrays while entries are
    small and silently become object arrays before anything could overflow;
    use :meth:`exact` for object copies."""

    def __init__(
        self,
        G,
        delta: float = 0.99,
        *,
        U: IntegerMatrix | None = None,
        deadline: float | None = None,
    ) -> None:
        G = as_gram(G)
        self.n = n = G.shape[0]
        if n and (min(np.diagonal(G)) <= 0 or _absmax(G) > max(np.diagonal(G))):
            raise NotPositiveDefinite("Gram matrix is not positive definite")
        U = identity(n) if U is None else np.array(U, dtype=object)
        self.G = _compact(G)
        self.U = _compact(U)
        self._umax = _absmax(self.U)
        self.delta = float(delta)
        self.delta_exact = delta_fraction(delta)
        self.deadline = deadline
        self.r = np.zeros((n, n))
        self.mu = np.eye(n)
        self.rdiag = np.zeros(n)
        self.swaps = 0
        self.exact_fallbacks = 0
        self._ticks = 0

    # -- bookkeeping -------------------------------------------------------

    def check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ReductionTimeout("reduction budget exhausted")

    def diag(self) -> list[int]:
        return [int(self.G[i, i]) for i in range(self.n)]

    def exact(self) -> tuple[IntegerMatrix, IntegerMatrix]:
        """Object-dtype copies of ``(G, U)``."""
        return _as_object(self.G), _as_object(self.U)

    def _room(self, growth: int) -> None:
        """Promote storage if entries may grow by ``growth`` in one operation.

        For a positive definite Gram matrix every entry is bounded by the
        largest diagonal entry, which bounds all intermediates here.
        """
        if self.G.dtype != object and self.n:
            dmax = int(np.diagonal(self.G).max())
            if dmax * growth * growth >= INT64_ROOM:
                self.G = self.G.astype(object)
        if self.U.dtype != object:
            if self._umax * growth >= INT64_ROOM:
                self._umax = _absmax(self.U)
                if self._umax * growth >= INT64_ROOM:
                    self.U = self.U.astype(object)

    # -- exact unimodular row operations -----------------------------------

    def add_row(self, dst: int, src: int, q: int) -> None:
        """``b_dst += q * b_src``."""
        if not q:
            return
        self._room(1 + abs(q))
        self._umax *= 1 + abs(q)
        G = self.G
        v = G[dst] + q * G[src]
        gdd = G[dst, dst] + 2 * q * G[dst, src] + q * q * G[src, src]
        G[dst, :] = v
        G[:, dst] = v
        G[dst, dst] = gdd
        self.U[dst] += q * self.U[src]

    def sub_rows(self, k: int, xs: dict[int, int]) -> None:
        """``b_k -= sum(x_j * b_j)`` over ``j`` in ``xs`` (all ``j != k``)."""
        growth = 1 + sum(abs(x) for x in xs.values())
        self._room(growth)
        self._umax *= growth
        idx = list(xs)
        G, U = self.G, self.U
        if G.dtype == object:
            xv = np.array([xs[j] for j in idx], dtype=object)
        else:
            xv = np.array([xs[j] for j in idx], dtype=np.int64)
        v = G[k] - xv.dot(G[idx])
        gkk = v[k] - xv.dot(v[idx])
        G[k, :] = v
        G[:, k] = v
        G[k, k] = gkk
        xu = xv if U.dtype == G.dtype else xv.astype(U.dtype)
        U[k] = U[k] - xu.dot(U[idx])

    def swap(self, i: int, j: int) -> None:
        G = self.G
        G[[i, j]] = G[[j, i]]
        G[:, [i, j]] = G[:, [j, i]]
        self.U[[i, j]] = self.U[[j, i]]

    def negate(self, i: int) -> None:
        G = self.G
        G[i, :] = -G[i, :]
        G[:, i] = -G[:, i]
        self.U[i] = -self.U[i]

    # -- float LLL ---------------------------------------------------------

    def _gso_row(self, k: int) -> None:
        g = self.G[k, :k].astype(float)
        rk = dtrsv(self.mu[:k, :k], g, lower=1, diag=1) if k else g
        self.r[k, :k] = rk
        self.mu[k, :k] = rk / self.rdiag[:k]

    def _size_reduce(self, k: int) -> None:
        mu = self.mu
        best = None
        stall = 0
        for _ in range(MAX_SIZE_REDUCTION_PASSES):
            self._gso_row(k)
            m = mu[k, :k]
            if not np.all(np.isfinite(m)):
                raise FloatFailure(f"non-finite mu in row {k}")
            if k == 0 or np.max(np.abs(m)) <= ETA:
                return
            m = m.copy()
            xs: dict[int, int] = {}
            hi = k
            while True:
                # clearing coefficient j shifts the ones below it, so rescan
                idx = np.flatnonzero(np.abs(m[:hi]) > 0.5)
                if not idx.size:
                    break
                j = int(idx[-1])
                x = float(np.rint(m[j]))
                if j:
                    m[:j] -= x * mu[j, :j]
                xs[j] = int(x)
                hi = j
            if not xs:
                return
            self.sub_rows(k, xs)
            gkk = self.G[k, k]
            if gkk <= 0:
                raise FloatFailure(f"row {k} collapsed during size reduction")
            if best is None or gkk < best:
                best, stall = gkk, 0
            else:
                stall += 1
                if stall >= STALL_LIMIT:
                    raise FloatFailure(f"size reduction of row {k} is not converging")
        raise FloatFailure(f"size reduction of row {k} exceeded {MAX_SIZE_REDUCTION_PASSES} passes")

    def _lll_compiled(self, start: int) -> int | None:
        """Run the compiled loop while the Gram matrix is int64.

        When ``U`` has outgrown int64 the loop accumulates a fresh int64
        transform that is folded into ``U`` on every return. Returns
        ``None`` when finished, else the row to resume from in Python.
        """
        kappa = start
        while self.G.dtype != object:
            direct = self.U.dtype != object
            W = self.U if direct else np.eye(self.n, dtype=np.int64)
            status, kappa, swaps = _kernel.lll_int64(
                self.G, W, self.r, self.mu, self.rdiag, kappa, self.delta,
                ETA, MAX_SIZE_REDUCTION_PASSES, STALL_LIMIT, KERNEL_BUDGET,
            )
            self.swaps += swaps
            if direct:
                self._umax = INT64_ROOM - 1
            else:
                self._fold(W)
            if status == _kernel.DONE:
                return None
            if status == _kernel.FLOAT_FAIL:
                raise FloatFailure(f"float Gram-Schmidt failed at row {kappa}")
            if status == _kernel.PROMOTE_U:
                if direct:
                    self.U = self.U.astype(object)
                elif not swaps and _is_identity(W):
                    # a single step overflows a fresh transform: go exact
                    self.G = self.G.astype(object)
                    return kappa
            elif status == _kernel.PROMOTE_G:
                self.G = self.G.astype(object)
                return kappa
            self.check_deadline()
        return start

    def _fold(self, V: np.ndarray) -> None:
        """``U <- V @ U`` touching only the rows where ``V`` is not the identity."""
        moved = np.flatnonzero((V != np.eye(self.n, dtype=np.int64)).any(axis=1))
        if not moved.size:
            return
        U = self.U
        new = {}
        for i in moved:
            nz = np.flatnonzero(V[i])
            new[i] = V[i, nz].astype(object).dot(U[nz])
        for i, row in new.items():
            U[i] = row

    def _coarse_rounds(self) -> bool:
        """Shrink a Gram matrix with huge entries using truncated copies.

        Each round LLL-reduces ``(G >> t) + n I``, roughly the Gram matrix
        of the basis scaled by ``2**(-t/2)`` with an identity block appended,
        in int64, and applies the resulting unimodular transform to the
        exact data. Returns True if ``G`` changed.
        """
        n = self.n
        changed = False
        while True:
            dmax = max(int(v) for v in np.diagonal(self.G))
            if dmax < COARSE_THRESHOLD:
                break
            self.check_deadline()
            t = dmax.bit_length() - COARSE_BITS
            Gt = np.array([[int(v) >> t for v in row] for row in self.G], dtype=np.int64)
            Gt[np.diag_indices(n)] += n
            V = np.eye(n, dtype=np.int64)
            r, mu, rdiag = np.zeros((n, n)), np.eye(n), np.zeros(n)
            kappa = 0
            while True:
                status, kappa, swaps = _kernel.lll_int64(
                    Gt, V, r, mu, rdiag, kappa, self.delta,
                    ETA, MAX_SIZE_REDUCTION_PASSES, STALL_LIMIT, KERNEL_BUDGET,
                )
                self.swaps += swaps
                if status != _kernel.BUDGET:
                    break
                self.check_deadline()
            if _is_identity(V):
                break
            Vo = _as_object(V)
            self.G = Vo.dot(_as_object(self.G)).dot(Vo.T)
            self.U = Vo.dot(_as_object(self.U))
            changed = True
        if changed:
            self.G = _compact(self.G)
            self.U = _compact(self.U)
            self._umax = _absmax(self.U)
        return changed

    def _lll_float(self, start: int = 0) -> None:
        n = self.n
        if n == 0:
            return
        if self.G.dtype == object and self._coarse_rounds():
            start = 0
        elif self.G.dtype == object and self.n:
            self.G = _compact(self.G)
        start = self._lll_compiled(start)
        if start is None:
            return
        G, r, mu, rdiag = self.G, self.r, self.mu, self.rdiag
        if start <= 0:
            rdiag[0] = r[0, 0] = float(G[0, 0])
            if rdiag[0] <= 0:
                raise FloatFailure("non-positive first norm")
        kappa = max(start, 1)
        delta = self.delta
        while kappa < n:
            self._ticks += 1
            if not self._ticks & 63:
                self.check_deadline()
            self._size_reduce(kappa)
            rk = r[kappa, :kappa]
            mk = mu[kappa, :kappa]
            s = float(G[kappa, kappa]) - float(np.dot(mk[: kappa - 1], rk[: kappa - 1]))
            if delta * rdiag[kappa - 1] <= s:
                rkk = s - mk[kappa - 1] * rk[kappa - 1]
                if not rkk > 0:
                    raise FloatFailure(f"non-positive Gram-Schmidt norm at {kappa}")
                rdiag[kappa] = r[kappa, kappa] = rkk
                kappa += 1
            else:
                self.swap(kappa - 1, kappa)
                self.swaps += 1
                if kappa == 1:
                    rdiag[0] = r[0, 0] = float(G[0, 0])
                kappa = max(kappa - 1, 1)

    # -- exact integral LLL ------------------------------------------------

    def certify(self) -> int:
        """Exact LLL (size-reduced with |mu| <= 1/2, Lovász at ``delta``).

        On an already reduced basis this only verifies. Returns the number of
        exact swaps it had to perform, and leaves float Gram-Schmidt data
        rounded from the exact values.
        """
        n = self.n
        if n == 0:
            return 0
        G = self.G
        p, q = self.delta_exact.numerator, self.delta_exact.denominator
        dd = [1] * (n + 1)  # dd[i+1] = det of the leading (i+1)x(i+1) Gram block
        lam = [[0] * n for _ in range(n)]
        dd[1] = int(G[0, 0])
        if dd[1] <= 0:
            raise NotPositiveDefinite("Gram matrix is not positive definite")
        swaps = 0

        def gs_row(k: int) -> None:
            lk = lam[k]
            for j in range(k + 1):
                u = int(G[k, j])
                lj = lam[j]
                for i in range(j):
                    u = (dd[i + 1] * u - lk[i] * lj[i]) // dd[i]
                if j < k:
                    lk[j] = u
                else:
                    if u <= 0:
                        raise NotPositiveDefinite("Gram matrix is not positive definite")
                    dd[k + 1] = u

        def redi(k: int, l: int) -> None:
            d = dd[l + 1]
            a = lam[k][l]
            if 2 * abs(a) > d:
                x = (2 * a + d) // (2 * d)
                self.add_row(k, l, -x)
                lam[k][l] = a - x * d
                lk, ll = lam[k], lam[l]
                for i in range(l):
                    lk[i] -= x * ll[i]

        def swapi(k: int, kmax: int) -> None:
            self.swap(k - 1, k)
            lk, lk1 = lam[k], lam[k - 1]
            for j in range(k - 1):
                lk[j], lk1[j] = lk1[j], lk[j]
            a = lk[k - 1]
            B = (dd[k - 1] * dd[k + 1] + a * a) // dd[k]
            for i in range(k + 1, kmax + 1):
                li = lam[i]
                t = li[k]
                li[k] = (dd[k + 1] * li[k - 1] - a * t) // dd[k]
                li[k - 1] = (B * t + a * li[k]) // dd[k + 1]
            dd[k] = B

        k, kmax = 1, 0
        while k < n:
            self._ticks += 1
            if not self._ticks & 63:
                self.check_deadline()
            if k > kmax:
                kmax = k
                gs_row(k)
            redi(k, k - 1)
            a = lam[k][k - 1]
            if p * dd[k] * dd[k] > q * (dd[k + 1] * dd[k - 1] + a * a):
                swapi(k, kmax)
                swaps += 1
                k = max(1, k - 1)
            else:
                for l in range(k - 2, -1, -1):
                    redi(k, l)
                k += 1

        r, mu, rdiag = self.r, self.mu, self.rdiag
        mu[:] = np.eye(n)
        r[:] = 0.0
        for k in range(n):
            rdiag[k] = r[k, k] = dd[k + 1] / dd[k]
            for j in range(k):
                mu[k, j] = lam[k][j] / dd[j + 1]
                r[k, j] = mu[k, j] * rdiag[j]
        self.swaps += swaps
        return swaps

    # -- driver ------------------------------------------------------------

    def lll(self, start: int = 0, *, certify: bool = True) -> None:
        """LLL-reduce rows ``start..`` (rows before ``start`` must have valid GSO)."""
        try:
            self._lll_float(start)
        except FloatFailure:
            self.exact_fallbacks += 1
            certify = True
        if certify:
            self.certify()

    def insert(self, j: int, coeffs: list[int]) -> None:
        """Make ``sum(c_i * b_{j+i})`` the row at ``j`` by unimodular operations.

        Pairwise Euclid on the coefficients, mirrored on the rows, leaves a
        single ±1 coefficient at position ``j``.
        """
        c = [int(v) for v in coeffs]
        g = 0
        for v in c:
            g = np.gcd(g, v)
        if g == 0:
            raise ValueError("cannot insert the zero vector")
        c = [v // int(g) for v in c]
        for i in range(len(c) - 1, 0, -1):
            while c[i]:
                if c[i - 1] == 0 or abs(c[i]) < abs(c[i - 1]):
                    self.swap(j + i - 1, j + i)
                    c[i - 1], c[i] = c[i], c[i - 1]
                    continue
                x = c[i] // c[i - 1]
                # keeps sum(c_t b_t) fixed: c_i -= x c_{i-1}, b_{i-1} += x b_i
                c[i] -= x * c[i - 1]
                self.add_row(j + i - 1, j + i, x)
        if c[0] == -1:
            self.negate(j)
        elif c[0] != 1:
            raise AssertionError("inserted coefficient vector was not primitive")


def _compact(A: np.ndarray) -> np.ndarray:
    if A.size and _absmax(A) < INT64_ROOM:
        return A.astype(np.int64)
    return np.array(A, dtype=object)


def _absmax(A: np.ndarray) -> int:
    if not A.size:
        return 0
    return int(max(int(A.max()), -int(A.min())))


def _is_identity(V: np.ndarray) -> bool:
    return bool((V == np.eye(V.shape[0], dtype=V.dtype)).all())


def _as_object(A: np.ndarray) -> np.ndarray:
    out = np.empty(A.shape, dtype=object)
    out[...] = [[int(v) for v in row] for row in A] if A.ndim == 2 else [int(v) for v in A]
    return out
