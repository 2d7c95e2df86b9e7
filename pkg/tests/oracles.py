"""Independent reference implementations used only by the tests.

Everything here is deliberately naive (Fractions, cofactor expansion,
bounded brute force) and shares no code with the package.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def det_laplace(M) -> int:
    rows = [[int(v) for v in row] for row in M]
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        total += (-1) ** j * rows[0][j] * det_laplace(minor)
    return total


def det_fraction(M) -> int:
    A = [[Fraction(int(v)) for v in row] for row in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    assert det.denominator == 1
    return int(det)


def det_integer(M) -> int:
    """Fraction-free elimination on plain lists (division-exact Bareiss)."""
    A = [[int(v) for v in row] for row in M]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            p = next((r for r in range(k + 1, n) if A[r][k] != 0), None)
            if p is None:
                return 0
            A[k], A[p] = A[p], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1] if n else 1


def matmul(A, B):
    A = [[int(v) for v in row] for row in A]
    B = [[int(v) for v in row] for row in B]
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)]


def as_lists(A):
    return [[int(v) for v in row] for row in A]


def gso_from_gram(G):
    """Exact ``mu`` and squared Gram-Schmidt norms from a Gram matrix."""
    G = [[Fraction(int(v)) for v in row] for row in G]
    n = len(G)
    mu = [[Fraction(0)] * n for _ in range(n)]
    r = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n
    for i in range(n):
        for j in range(i + 1):
            r[i][j] = G[i][j] - sum(mu[j][k] * r[i][k] for k in range(j))
            if j < i:
                mu[i][j] = r[i][j] / B[j]
        B[i] = r[i][i]
        if B[i] <= 0:
            raise ValueError("not positive definite")
    return mu, B


def lll_violations(G, delta) -> list[str]:
    """Empty iff ``G`` is size-reduced and Lovász-reduced at ``delta``."""
    delta = Fraction(delta).limit_denominator(10**9)
    mu, B = gso_from_gram(G)
    bad = []
    n = len(B)
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                bad.append(f"|mu[{i}][{j}]| = {float(abs(mu[i][j]))}")
    for k in range(1, n):
        if delta * B[k - 1] > B[k] + mu[k][k - 1] ** 2 * B[k - 1]:
            bad.append(f"lovasz fails at {k}")
    return bad


def projected_block(G, start: int, end: int):
    """Gram matrix of the projections of b_start..b_{end-1} orthogonally to b_0..b_{start-1}."""
    G = [[Fraction(int(v)) for v in row] for row in G]
    if start == 0:
        return [row[start:end] for row in G[start:end]]
    # Schur complement of the leading block
    A = [row[:start] for row in G[:start]]
    inv = _inverse(A)
    out = []
    for i in range(start, end):
        out_row = []
        for j in range(start, end):
            s = G[i][j]
            for a in range(start):
                for b in range(start):
                    s -= G[i][a] * inv[a][b] * G[b][j]
            out_row.append(s)
        out.append(out_row)
    return out


def _inverse(A):
    n = len(A)
    M = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [v / piv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def exact_lstsq(rows, target):
    """Rational least-squares coefficients of ``target`` against ``rows``."""
    R = as_lists(rows)
    gram = [[Fraction(sum(a * b for a, b in zip(r1, r2))) for r2 in R] for r1 in R]
    rhs = [sum(a * int(b) for a, b in zip(r, target)) for r in R]
    inv = _inverse(gram)
    return [sum(inv[i][j] * rhs[j] for j in range(len(R))) for i in range(len(R))]


def quad(G, c):
    return sum(c[i] * G[i][j] * c[j] for i in range(len(c)) for j in range(len(c)))


def brute_force_min(G):
    """Minimum of c^T G c over nonzero integer c, by a provable coefficient box.

    With Cholesky-free bounds: |c_i| <= sqrt(G_00_min * (G^{-1})_ii) for any
    vector no longer than the shortest basis vector.
    """
    G = [[Fraction(v) if not isinstance(v, Fraction) else v for v in row] for row in G]
    k = len(G)
    r2 = min(G[i][i] for i in range(k))
    inv = _inverse(G)
    bounds = [math.isqrt(math.floor(r2 * inv[i][i])) + 1 for i in range(k)]
    best = None
    for c in itertools.product(*(range(-b, b + 1) for b in bounds)):
        if any(c):
            v = quad(G, c)
            if best is None or v < best:
                best = v
    return best


def signed_permutation_by_search(A, B) -> bool:
    """True iff B = A Q for a signed permutation Q, by trying all of them (n <= 5)."""
    A, B = as_lists(A), as_lists(B)
    n = len(A)
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            Q = [[0] * n for _ in range(n)]
            for i in range(n):
                Q[i][perm[i]] = signs[i]
            if matmul(A, Q) == B:
                return True
    return False


def unimodular_box(n: int, T: int):
    """All n x n matrices with entries in [-T, T] and det +-1 (tiny n only)."""
    out = []
    for entries in itertools.product(range(-T, T + 1), repeat=n * n):
        M = [list(entries[i * n : (i + 1) * n]) for i in range(n)]
        if abs(det_laplace(M)) == 1:
            out.append(tuple(entries))
    return out
