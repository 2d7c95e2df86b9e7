"""Exact integer linear algebra on dense matrices.

An integer matrix is a 2-d ``numpy.ndarray`` of ``dtype=object`` holding
Python ``int`` entries, so products and row operations are exact at any
magnitude while slicing and broadcasting stay available.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

IntegerMatrix = np.ndarray


def as_matrix(data: Iterable[Iterable[int]] | np.ndarray) -> IntegerMatrix:
    """Copy ``data`` into a 2-d object array of Python ints."""
    rows = [[int(v) for v in row] for row in data]
    if not rows:
        return np.empty((0, 0), dtype=object)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix")
    out = np.empty((len(rows), width), dtype=object)
    for i, r in enumerate(rows):
        out[i, :] = r
    return out


def as_vector(data: Iterable[int]) -> np.ndarray:
    vals = [int(v) for v in data]
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def identity(n: int) -> IntegerMatrix:
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    # np.zeros(dtype=object) fills with int 0, which is what we want
    return out


def zeros(n: int, m: int | None = None) -> IntegerMatrix:
    return np.zeros((n, n if m is None else m), dtype=object)


def _require_square(M: np.ndarray) -> int:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M.shape[0]


def to_lists(M: np.ndarray) -> list[list[int]]:
    return [[int(v) for v in row] for row in M]


def gram_of(M: IntegerMatrix) -> IntegerMatrix:
    """Return ``M @ M.T`` exactly."""
    M = np.asarray(M, dtype=object)
    _require_square(M)
    G = M.dot(M.T)
    return G


def row_sq_norms(M: IntegerMatrix) -> list[int]:
    return [int(sum(int(v) * int(v) for v in row)) for row in M]


# ---------------------------------------------------------------------------
# fraction-free elimination


def _bareiss(A: np.ndarray, pivot_cols: int) -> tuple[np.ndarray, list[int], int]:
    """In-place fraction-free row echelon on the first ``pivot_cols`` columns.

    Returns ``(A, pivots, sign)`` where ``pivots[k]`` is the column of the
    k-th pivot and ``sign`` is the parity of the row swaps. Columns past
    ``pivot_cols`` ride along (augmented right-hand sides). Every entry is,
    up to sign, a minor of the input, so each division is exact.
    """
    rows = A.shape[0]
    prev = 1
    sign = 1
    pivots: list[int] = []
    k = 0
    for c in range(pivot_cols):
        if k == rows:
            break
        nz = [i for i in range(k, rows) if A[i, c] != 0]
        if not nz:
            continue
        # smallest pivot keeps intermediate sizes down; exactness does not depend on it
        p = min(nz, key=lambda i: abs(A[i, c]))
        if p != k:
            A[[k, p]] = A[[p, k]]
            sign = -sign
        pk = A[k, c]
        if k + 1 < rows:
            below = A[k + 1 :, c].copy()
            A[k + 1 :, c + 1 :] = (
                pk * A[k + 1 :, c + 1 :] - np.outer(below, A[k, c + 1 :])
            ) // prev
            A[k + 1 :, c] = 0
        pivots.append(c)
        prev = pk
        k += 1
    return A, pivots, sign


def det_exact(M: IntegerMatrix) -> int:
    """Exact determinant by Bareiss elimination."""
    M = np.array(M, dtype=object)
    n = _require_square(M)
    if n == 0:
        return 1
    A, pivots, sign = _bareiss(M, n)
    if len(pivots) < n:
        return 0
    return sign * int(A[n - 1, n - 1])


def _backsolve(U: np.ndarray, D: int, rhs: np.ndarray) -> np.ndarray:
    """Solve ``U x = rhs`` scaled by ``D``, for a Bareiss upper-triangular ``U``.

    ``U[-1, -1] == D``; the returned rows are ``D * x`` and are integral.
    """
    n = U.shape[0]
    X = np.zeros(rhs.shape, dtype=object)
    for i in range(n - 1, -1, -1):
        acc = D * rhs[i]
        if i + 1 < n:
            acc = acc - U[i, i + 1 :].dot(X[i + 1 :])
        X[i] = acc // U[i, i]
    return X


def unimodular_inverse(M: IntegerMatrix) -> IntegerMatrix:
    """Exact integer inverse of a determinant ±1 matrix."""
    M = np.asarray(M, dtype=object)
    n = _require_square(M)
    aug = np.concatenate([M, identity(n)], axis=1)
    A, pivots, _ = _bareiss(aug, n)
    if len(pivots) < n:
        raise ValueError("matrix is singular")
    D = int(A[n - 1, n - 1])
    if abs(D) != 1:
        raise ValueError(f"matrix is not unimodular (|det| = {abs(D)})")
    X = _backsolve(A[:, :n], D, A[:, n:])
    return X * D  # D*x with D = ±1, so x = D * (D*x)


def matmul(*mats: IntegerMatrix) -> IntegerMatrix:
    out = np.asarray(mats[0], dtype=object)
    for m in mats[1:]:
        out = out.dot(np.asarray(m, dtype=object))
    return out


# ---------------------------------------------------------------------------
# signed permutations


@dataclass(frozen=True)
class SignedPermutation:
    """``W[i, perm[i]] = signs[i]``, all other entries zero."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def matrix(self) -> IntegerMatrix:
        n = len(self.perm)
        W = zeros(n)
        for i, (j, s) in enumerate(zip(self.perm, self.signs)):
            W[i, j] = s
        return W


def signed_permutation_of(W: IntegerMatrix) -> SignedPermutation | None:
    """Decode ``W`` as a signed permutation, or ``None`` if it is not one."""
    W = np.asarray(W, dtype=object)
    n = _require_square(W)
    perm: list[int] = []
    signs: list[int] = []
    for i in range(n):
        nz = [j for j in range(n) if W[i, j] != 0]
        if len(nz) != 1 or W[i, nz[0]] not in (1, -1):
            return None
        perm.append(nz[0])
        signs.append(int(W[i, nz[0]]))
    if len(set(perm)) != n:
        return None
    return SignedPermutation(tuple(perm), tuple(signs))


def is_signed_permutation(W: IntegerMatrix) -> bool:
    return signed_permutation_of(W) is not None


# ---------------------------------------------------------------------------
# Hermite normal form


@dataclass(frozen=True)
class HnfDecomposition:
    triangular: IntegerMatrix
    unimodular: IntegerMatrix


def hnf_column_decompose(B: IntegerMatrix) -> HnfDecomposition:
    """Factor ``B`` (m x n, m >= n, column rank n) as ``B = U @ M``.

    ``U`` is the column Hermite form of ``B``: zero above the diagonal,
    positive pivots, and every entry left of a pivot reduced into
    ``[0, pivot)``. ``M`` is unimodular. Raises ``ValueError`` when the
    columns of ``B`` are dependent.
    """
    W = np.array(B, dtype=object)
    if W.ndim != 2:
        raise ValueError("expected a matrix")
    m, n = W.shape
    if m < n:
        raise ValueError(f"need m >= n, got {m}x{n}")
    # W = B @ V for the accumulated column operations V; Minv tracks V^{-1}
    Minv = identity(n)
    p = 0
    for r in range(m):
        if p == n:
            break
        while True:
            nz = [j for j in range(p, n) if W[r, j] != 0]
            if not nz:
                break
            j0 = min(nz, key=lambda j: abs(W[r, j]))
            if j0 != p:
                W[:, [p, j0]] = W[:, [j0, p]]
                Minv[[p, j0]] = Minv[[j0, p]]
            if len(nz) == 1:
                break
            a = W[r, p]
            for j in range(p + 1, n):
                q = W[r, j] // a
                if q:
                    W[:, j] -= q * W[:, p]
                    Minv[p] += q * Minv[j]
        if W[r, p] == 0:
            continue
        if W[r, p] < 0:
            W[:, p] = -W[:, p]
            Minv[p] = -Minv[p]
        a = W[r, p]
        for j in range(p):
            q = W[r, j] // a
            if q:
                W[:, j] -= q * W[:, p]
                Minv[p] += q * Minv[j]
        p += 1
    if p < n:
        raise ValueError("matrix has dependent columns (rank-deficient)")
    return HnfDecomposition(triangular=W, unimodular=Minv)


# ---------------------------------------------------------------------------
# pieces of the minors construction


def cofactor_minor_vector(bottom: IntegerMatrix) -> list[int]:
    """Signed maximal minors of an (n-1) x n matrix.

    Entry ``j`` is ``(-1)**j`` (0-based) times the determinant of ``bottom``
    with column ``j`` deleted, i.e. the first-row cofactors of any n x n
    matrix whose last n-1 rows are ``bottom``. The vector is orthogonal to
    every row of ``bottom``. All minors come from one fraction-free
    elimination plus one back substitution.
    """
    A = np.array(bottom, dtype=object)
    if A.ndim != 2 or A.shape[1] != A.shape[0] + 1:
        raise ValueError(f"expected an (n-1) x n matrix, got shape {A.shape}")
    k, n = A.shape
    if k == 0:
        return [1]
    E, pivots, sign = _bareiss(A.copy(), n)
    if len(pivots) < k:
        return [0] * n
    free = next(c for c in range(n) if c not in pivots)
    U = E[:, pivots]
    D = int(U[k - 1, k - 1])  # det of bottom minus the free column, times sign
    rhs = -E[:, free]
    X = _backsolve(U, D, rhs.reshape(k, 1)).reshape(k)
    # kernel vector: 1 at `free`, y_j = X_j / D at the pivot columns
    c_free = (-1) ** free * sign * D
    out = [0] * n
    out[free] = c_free
    s = (-1) ** free * sign
    for idx, col in enumerate(pivots):
        out[col] = s * int(X[idx])
    return out


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y == g == gcd(a, b) >= 0``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def extended_gcd_chain(c: Sequence[int]) -> tuple[int, list[int]]:
    """Bezout coefficients for a list by chained two-term Euclid, left to right.

    Once a prefix is coprime the later coefficients are all zero.
    """
    vals = [int(v) for v in c]
    if not vals or all(v == 0 for v in vals):
        raise ValueError("extended_gcd_chain needs a nonzero entry")
    g = 0
    coeffs: list[int] = []
    for v in vals:
        g, x, y = xgcd(g, v)
        coeffs = [x * w for w in coeffs]
        coeffs.append(y)
    return g, coeffs


# coefficients this close to 1/2 count as already reduced
TIE_SLACK = 1e-9


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def least_squares_round_reduce(
    top: Sequence[int], rows: IntegerMatrix, *, max_passes: int = 64
) -> list[int]:
    """Subtract the rounded least-squares combination of ``rows`` from ``top``.

    Float64 least squares only gets the leading ~50 bits of each coefficient
    right, which is useless when ``top`` has hundreds of bits. So the solve
    is refined: round, subtract exactly, and re-solve against the exact
    integer residual until all coefficients round to zero. The accumulated
    integer coefficients are then the rounded exact solution.
    """
    R = np.array(rows, dtype=object)
    t = as_vector(top)
    if R.ndim != 2 or R.shape[1] != t.shape[0]:
        raise ValueError("rows and top have mismatched widths")
    if R.shape[0] == 0:
        return [int(v) for v in t]
    Rf = R.astype(float)
    if np.linalg.matrix_rank(Rf) < R.shape[0]:
        raise ValueError("rows are rank-deficient")
    # R R^T = Rtri^T Rtri; the right-hand side R @ cur is formed exactly so
    # a large component of top orthogonal to the rows cannot swamp it
    _, Rtri = np.linalg.qr(Rf.T)
    cur = t.copy()
    for _ in range(max_passes):
        rhs = R.dot(cur)
        scale = max(abs(int(v)) for v in rhs)
        if scale == 0:
            break
        # rescale so huge right-hand sides stay inside float range
        shift = max(0, scale.bit_length() - 900)
        vec = np.array([float(int(v) >> shift) for v in rhs])
        coef = np.linalg.solve(Rtri, np.linalg.solve(Rtri.T, vec))
        if not shift and max(abs(coef)) <= 0.5 + TIE_SLACK:
            # converged; exact half-integer ties would otherwise flip forever
            break
        ints = [round_half_away(c) << shift if shift else round_half_away(c) for c in coef]
        if not any(ints):
            break
        cur = cur - as_vector(ints).dot(R)
    else:
        raise RuntimeError("least-squares refinement did not converge")
    before = sum(int(v) ** 2 for v in t)
    after = sum(int(v) ** 2 for v in cur)
    if after > before:
        return [int(v) for v in t]
    return [int(v) for v in cur]
