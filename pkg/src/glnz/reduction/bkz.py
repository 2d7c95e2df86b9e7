"""BKZ tours on a :class:`GramReducer`."""

from __future__ import annotations

import numpy as np

from glnz.linalg import det_exact
from glnz.reduction.engine import GramReducer
from glnz.reduction.enumeration import ENUM_CAP, enumerate_short

# candidates this much shorter are inserted on the float evidence alone;
# closer calls are settled exactly
INSERT_RATIO = 0.999
# float slack when searching for candidates that may tie the current vector
SEARCH_SLACK = 1e-6


def _projected_det(red: GramReducer, j: int, coeffs: list[int]) -> int:
    """``det Gram(b_0, ..., b_{j-1}, v)`` for ``v = sum c_i b_{j+i}``.

    Dividing by ``det Gram(b_0, ..., b_{j-1})`` gives the squared norm of
    ``v`` projected away from the first ``j`` rows.
    """
    G, _ = red.exact()
    idx = [j + i for i, c in enumerate(coeffs) if c]
    c = np.array([int(coeffs[i - j]) for i in idx], dtype=object)
    cross = G[:j][:, idx].dot(c) if j else np.zeros(0, dtype=object)
    vv = c.dot(G[idx][:, idx].dot(c))
    A = np.empty((j + 1, j + 1), dtype=object)
    A[:j, :j] = G[:j, :j]
    A[:j, j] = cross
    A[j, :j] = cross
    A[j, j] = vv
    return det_exact(A)


def _strictly_shorter(red: GramReducer, j: int, coeffs: list[int]) -> bool:
    e0 = [1] + [0] * (len(coeffs) - 1)
    return _projected_det(red, j, coeffs) < _projected_det(red, j, e0)


def bkz_tour(red: GramReducer, beta: int, *, prune: bool | None = None) -> int:
    """One left-to-right sweep; returns the number of insertions.

    Expects ``red`` to hold an LLL-reduced basis with valid float GSO.
    """
    n = red.n
    insertions = 0
    for j in range(n - 1):
        red.check_deadline()
        k = min(beta, n - j)
        mu = red.mu[j : j + k, j : j + k]
        rdiag = red.rdiag[j : j + k]
        coeffs, val = enumerate_short(mu, rdiag, (1 + SEARCH_SLACK) * rdiag[0], prune=prune)
        if coeffs is None or _is_first_unit(coeffs):
            continue
        if val >= INSERT_RATIO * rdiag[0] and not _strictly_shorter(red, j, coeffs):
            continue
        red.insert(j, coeffs)
        red.lll(j, certify=False)
        insertions += 1
    return insertions


def _is_first_unit(c: list[int]) -> bool:
    return abs(c[0]) == 1 and not any(c[1:])


def bkz(
    red: GramReducer,
    beta: int,
    *,
    max_rounds: int = 64,
    prune: bool | None = None,
    on_tour=None,
) -> tuple[int, bool]:
    """Tours until one makes no insertion or ``max_rounds`` is reached.

    Returns ``(rounds, improving_rounds, converged)``. The exact
    certification at the end leaves the basis LLL-reduced with proved
    conditions.
    """
    if not 2 <= beta <= ENUM_CAP:
        raise ValueError(f"block size must be in 2..{ENUM_CAP}, got {beta}")
    rounds = improving = 0
    converged = False
    while rounds < max_rounds:
        rounds += 1
        changed = bkz_tour(red, beta, prune=prune)
        if changed:
            improving += 1
        if on_tour is not None and on_tour(red):
            break
        if not changed:
            converged = True
            break
    if red.certify():
        # exact pass had to swap: the blocks are no longer known to be minimal
        converged = False
    return rounds, improving, converged
