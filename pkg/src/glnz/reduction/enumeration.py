"""Schnorr-Euchner enumeration of short vectors in a (projected) block."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

ENUM_CAP = 30
FULL_ENUM_MAX = 8


class EnumerationTooLarge(ValueError):
    pass


def _pruning(k: int, prune: bool | None) -> list[float]:
    """Fraction of the radius allowed at each level (index = coordinate).

    Linear pruning: with coordinates ``i..k-1`` fixed, the partial norm may
    use ``(k - i) / k`` of the radius.
    """
    if prune is None:
        prune = k > FULL_ENUM_MAX
    if not prune:
        return [1.0] * k
    return [(k - i) / k for i in range(k)]


def enumerate_short(
    mu: np.ndarray,
    rdiag: np.ndarray,
    radius2: float,
    *,
    prune: bool | None = None,
    collect: bool = False,
) -> tuple[list[int] | None, float] | list[tuple[list[int], float]]:
    """Depth-first zig-zag enumeration over the block with Gram-Schmidt data.

    ``mu`` is unit lower triangular and ``rdiag`` holds squared
    Gram-Schmidt norms. Without ``collect`` the radius shrinks to each new
    best and the shortest nonzero vector strictly inside ``radius2`` is
    returned (or ``None``). With ``collect`` the radius stays fixed and every
    nonzero vector within it is returned (one of each ``±v`` pair, last
    nonzero coordinate positive).
    """
    k = len(rdiag)
    if k > ENUM_CAP:
        raise EnumerationTooLarge(f"block dimension {k} exceeds enumeration cap {ENUM_CAP}")
    mu_l = [[float(v) for v in row] for row in mu]
    r = [float(v) for v in rdiag]
    frac = _pruning(k, prune)
    x = [0] * k
    best: list = [None, float(radius2)]
    found: list[tuple[list[int], float]] = []

    def visit(i: int, partial: float, top_zero: bool) -> None:
        c = 0.0
        for j in range(i + 1, k):
            if x[j]:
                c -= x[j] * mu_l[j][i]
        bound = best[1] * frac[i]
        ri = r[i]
        base = round(c)
        # zig-zag: base, base±1, base±2, ... by increasing distance to c
        if top_zero:
            cands = _nonneg_walk()
        else:
            cands = _zigzag(base, c)
        for xi in cands:
            d = xi - c
            val = partial + d * d * ri
            if val > bound if collect else val >= bound:
                if top_zero and xi == 0:
                    continue
                break
            x[i] = xi
            if i == 0:
                if top_zero and xi == 0:
                    continue
                if collect:
                    found.append((list(x), val))
                else:
                    best[0], best[1] = list(x), val
                    bound = val * frac[i]
            else:
                visit(i - 1, val, top_zero and xi == 0)
                bound = best[1] * frac[i]
        x[i] = 0

    visit(k - 1, 0.0, True)
    if collect:
        return found
    return best[0], best[1]


def _nonneg_walk():
    v = 0
    while True:
        yield v
        v += 1


def _zigzag(base: int, c: float):
    yield base
    step = 1
    up_first = c >= base
    while True:
        if up_first:
            yield base + step
            yield base - step
        else:
            yield base - step
            yield base + step
        step += 1


def gso_of(G) -> tuple[np.ndarray, np.ndarray]:
    """Float Gram-Schmidt ``(mu, rdiag)`` of a small Gram matrix via Cholesky."""
    Gf = np.array([[float(v) for v in row] for row in G])
    L = np.linalg.cholesky(Gf)
    d = np.diag(L)
    return L / d, d * d


def _canonical(c: list[int]) -> list[int]:
    for v in c:
        if v:
            return c if v > 0 else [-w for w in c]
    return c


def _exact_norm(G, c: list[int]):
    k = len(c)
    total = 0
    for i in range(k):
        if c[i]:
            row = G[i]
            s = 0
            for j in range(k):
                if c[j]:
                    s += row[j] * c[j]
            total += c[i] * s
    return total


def svp_enumerate_block(G, radius2=None, *, prune: bool | None = None) -> tuple[list[int], object]:
    """Shortest nonzero ``c`` minimizing ``c^T G c`` for a small Gram ``G``.

    ``G`` may hold ints, Fractions or floats; the winner is chosen by exact
    comparison of ``c^T G c`` in that arithmetic among every float candidate
    within a small slack of the float minimum. Ties go to the
    lexicographically smallest vector with first nonzero entry positive.
    Returns ``(c, c^T G c)``.
    """
    rows = [list(row) for row in G]
    k = len(rows)
    if k == 0:
        raise ValueError("empty block")
    if k > ENUM_CAP:
        raise EnumerationTooLarge(f"block dimension {k} exceeds enumeration cap {ENUM_CAP}")
    mu, rdiag = gso_of(rows)
    if radius2 is None:
        radius2 = min(float(rows[i][i]) for i in range(k))
    bound = float(radius2) * (1 + 1e-9) + 1e-300
    c, val = enumerate_short(mu, rdiag, bound, prune=prune)
    if c is None:
        raise ValueError("no nonzero vector within the given radius")
    slack = val * (1 + 1e-7) + 1e-12
    cands = enumerate_short(mu, rdiag, slack, prune=prune, collect=True)
    best_c, best_v = None, None
    for cand, _ in cands:
        cand = _canonical(cand)
        v = _exact_norm(rows, cand)
        if best_v is None or v < best_v or (v == best_v and cand < best_c):
            best_c, best_v = cand, v
    if isinstance(best_v, Fraction) and best_v.denominator == 1:
        best_v = best_v.numerator
    return best_c, best_v
