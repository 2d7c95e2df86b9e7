"""Compiled float LLL loop over int64 Gram/transform storage.

Status codes returned by :func:`lll_int64`:

* ``DONE``: rows ``0..n-1`` are reduced (float criteria).
* ``PROMOTE_G``: a Gram entry could leave int64; nothing was applied.
* ``PROMOTE_U``: a transform entry could leave int64; nothing was applied.
* ``FLOAT_FAIL``: Gram-Schmidt data became unusable.
* ``BUDGET``: ``budget`` iterations used; resume from the returned ``kappa``.

int64 arithmetic wraps modulo 2**64, so intermediate overflow is harmless
as long as every final entry fits. Final entries are previewed in float
with a rounding margin before any row operation is applied.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DONE = 0
PROMOTE_G = 1
FLOAT_FAIL = 2
BUDGET = 3
PROMOTE_U = 4

_ROOM = float(1 << 62)
_EPS = 2.0**-50


@njit(cache=True)
def _gso_row(G, r, mu, rdiag, k):
    for j in range(k):
        s = float(G[k, j])
        for i in range(j):
            s -= mu[j, i] * r[k, i]
        r[k, j] = s
        mu[k, j] = s / rdiag[j]


@njit(cache=True)
def _size_reduce(G, U, r, mu, rdiag, k, eta, max_passes, stall_limit, x, m):
    n = G.shape[0]
    best = -1
    stall = 0
    for _ in range(max_passes):
        _gso_row(G, r, mu, rdiag, k)
        amax = 0.0
        for j in range(k):
            a = abs(mu[k, j])
            if not np.isfinite(a):
                return FLOAT_FAIL
            if a > amax:
                amax = a
        if amax <= eta:
            return DONE
        for j in range(k):
            m[j] = mu[k, j]
            x[j] = 0
        total = 0.0
        for j in range(k - 1, -1, -1):
            if abs(m[j]) > 0.5:
                xj = np.rint(m[j])
                x[j] = np.int64(xj)
                total += abs(xj)
                for i in range(j):
                    m[i] -= xj * mu[j, i]
        if total == 0.0:
            return DONE
        for j in range(k):
            if abs(float(x[j])) >= _ROOM:
                return PROMOTE_G
        margin = (k + 2) * _EPS
        bmax = 0.0
        for t in range(n):
            vf = float(G[k, t])
            b = abs(vf)
            for j in range(k):
                if x[j] != 0:
                    p = float(x[j]) * float(G[j, t])
                    vf -= p
                    b += abs(p)
            m[n + t] = vf
            if b > bmax:
                bmax = b
        err = bmax * margin
        gf = m[n + k]
        bg = abs(gf) + err
        for j in range(k):
            if x[j] != 0:
                p = float(x[j]) * m[n + j]
                gf -= p
                bg += abs(p) + abs(float(x[j])) * err
        if abs(gf) + bg * margin + err * (1.0 + total) >= _ROOM:
            return PROMOTE_G
        for t in range(n):
            if abs(m[n + t]) + err >= _ROOM:
                return PROMOTE_G
        for t in range(U.shape[1]):
            wf = float(U[k, t])
            b = abs(wf)
            for j in range(k):
                if x[j] != 0:
                    p = float(x[j]) * float(U[j, t])
                    wf -= p
                    b += abs(p)
            if abs(wf) + b * margin >= _ROOM:
                return PROMOTE_U
        # new row of inner products, then the new squared norm
        for t in range(n):
            s = G[k, t]
            for j in range(k):
                if x[j] != 0:
                    s -= x[j] * G[j, t]
            G[k, t] = s
        gkk = G[k, k]
        for j in range(k):
            if x[j] != 0:
                gkk -= x[j] * G[k, j]
        for t in range(n):
            G[t, k] = G[k, t]
        G[k, k] = gkk
        for t in range(U.shape[1]):
            s = U[k, t]
            for j in range(k):
                if x[j] != 0:
                    s -= x[j] * U[j, t]
            U[k, t] = s
        if gkk <= 0:
            return FLOAT_FAIL
        if best < 0 or gkk < best:
            best = gkk
            stall = 0
        else:
            stall += 1
            if stall >= stall_limit:
                return FLOAT_FAIL
    return FLOAT_FAIL


@njit(cache=True)
def _swap(G, U, a, b):
    n = G.shape[0]
    for t in range(n):
        tmp = G[a, t]
        G[a, t] = G[b, t]
        G[b, t] = tmp
    for t in range(n):
        tmp = G[t, a]
        G[t, a] = G[t, b]
        G[t, b] = tmp
    for t in range(U.shape[1]):
        tmp = U[a, t]
        U[a, t] = U[b, t]
        U[b, t] = tmp


@njit(cache=True)
def lll_int64(G, U, r, mu, rdiag, kappa, delta, eta, max_passes, stall_limit, budget):
    """Returns ``(status, kappa, swaps)``; rows below ``kappa`` keep valid GSO."""
    n = G.shape[0]
    swaps = 0
    x = np.zeros(n, dtype=np.int64)
    m = np.zeros(2 * n)
    if n == 0:
        return DONE, 0, 0
    if kappa <= 0:
        rdiag[0] = r[0, 0] = float(G[0, 0])
        if not rdiag[0] > 0:
            return FLOAT_FAIL, 0, 0
        kappa = 1
    steps = 0
    while kappa < n:
        if steps >= budget:
            return BUDGET, kappa, swaps
        steps += 1
        st = _size_reduce(G, U, r, mu, rdiag, kappa, eta, max_passes, stall_limit, x, m)
        if st != DONE:
            return st, kappa, swaps
        s = float(G[kappa, kappa])
        for i in range(kappa - 1):
            s -= mu[kappa, i] * r[kappa, i]
        if delta * rdiag[kappa - 1] <= s:
            rkk = s - mu[kappa, kappa - 1] * r[kappa, kappa - 1]
            if not rkk > 0:
                return FLOAT_FAIL, kappa, swaps
            rdiag[kappa] = rkk
            r[kappa, kappa] = rkk
            kappa += 1
        else:
            _swap(G, U, kappa - 1, kappa)
            swaps += 1
            if kappa == 1:
                rdiag[0] = r[0, 0] = float(G[0, 0])
            else:
                kappa -= 1
    return DONE, kappa, swaps
