"""Seeded generators of random GL(n, Z) matrices.

Every generator takes an :class:`~glnz.rng.RngStream` (or a bare 64-bit
seed) and returns a :class:`GenerationRecord`. Products are accumulated by
column operations on the running matrix rather than full multiplications.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from glnz.linalg import (
    IntegerMatrix,
    cofactor_minor_vector,
    det_exact,
    extended_gcd_chain,
    hnf_column_decompose,
    identity,
    least_squares_round_reduce,
    zeros,
)
from glnz.rng import RngStream

BOX_FEASIBILITY_CAP = 6
DEFAULT_ATTEMPTS = 1_000_000
DEFAULT_RESAMPLES = 10_000

A_PLUS = ((1, 1), (1, 2))
A_MINUS = ((1, -1), (-1, 2))


class GenerationError(RuntimeError):
    """A generator ran out of attempts or was asked for an infeasible size."""


@dataclass
class GenerationRecord:
    generator: str
    params: dict[str, Any]
    seed: int
    matrix: IntegerMatrix
    entropy_bits: float
    wall_time: float
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _stream(rng: RngStream | int) -> RngStream:
    return rng if isinstance(rng, RngStream) else RngStream(int(rng))


class _Recorder:
    """Context that times a generator and measures entropy drawn from ``rng``."""

    def __init__(self, name: str, rng: RngStream, params: dict[str, Any]):
        self.name, self.rng, self.params = name, rng, params

    def __enter__(self) -> _Recorder:
        self.t0 = time.perf_counter()
        self.e0 = self.rng.entropy_bits
        return self

    def __exit__(self, *exc) -> None:
        return None

    def record(self, matrix: IntegerMatrix, **info: Any) -> GenerationRecord:
        return GenerationRecord(
            generator=self.name,
            params=dict(self.params),
            seed=self.rng.seed,
            matrix=matrix,
            entropy_bits=self.rng.entropy_bits - self.e0,
            wall_time=time.perf_counter() - self.t0,
            info=info,
        )


def _uniform_matrix(rng: RngStream, rows: int, cols: int, T: int) -> IntegerMatrix:
    out = zeros(rows, cols)
    span = 2 * T + 1
    for i in range(rows):
        out[i, :] = [rng.below(span) - T for _ in range(cols)]
    return out


def _lines_coprime(M: IntegerMatrix) -> bool:
    for line in list(M) + list(M.T):
        if math.gcd(*(int(v) for v in line)) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Algorithm 1: rejection sampling in the box


def sample_box_unimodular(
    rng: RngStream,
    n: int,
    T: int,
    *,
    prefilter: bool = True,
    max_attempts: int = DEFAULT_ATTEMPTS,
) -> tuple[IntegerMatrix, int]:
    """Draw a uniform element of the box ``|m_ij| <= T`` with det ±1.

    Returns the matrix and the number of attempts used. The common-factor
    prefilter only skips determinant evaluations, so the output law is
    unchanged.
    """
    for attempt in range(1, max_attempts + 1):
        M = _uniform_matrix(rng, n, n, T)
        if prefilter and not _lines_coprime(M):
            continue
        if abs(det_exact(M)) == 1:
            return M, attempt
    raise GenerationError(f"no unimodular matrix after {max_attempts} attempts (n={n}, T={T})")


def gen_box_rejection(
    n: int,
    T: int,
    rng: RngStream | int,
    *,
    cap: int = BOX_FEASIBILITY_CAP,
    max_attempts: int | None = None,
    prefilter: bool = True,
) -> GenerationRecord:
    """Uniform sample of the box of unimodular matrices, by rejection.

    Refuses ``n > cap`` unless an explicit ``max_attempts`` budget is given.
    """
    if n < 1 or T < 1:
        raise ValueError("need n >= 1 and T >= 1")
    if n > cap and max_attempts is None:
        raise GenerationError(
            f"box rejection sampling is capped at n <= {cap} (got n={n}); "
            "pass an explicit attempt budget to override"
        )
    rng = _stream(rng)
    with _Recorder("box", rng, {"n": n, "T": T}) as rec:
        M, attempts = sample_box_unimodular(
            rng, n, T, prefilter=prefilter, max_attempts=max_attempts or DEFAULT_ATTEMPTS
        )
        return rec.record(M, attempts=attempts)


# ---------------------------------------------------------------------------
# Algorithm 2: random words in unipotent generators


def gen_unipotent_product(n: int, b: int, length: int, rng: RngStream | int) -> GenerationRecord:
    """Product of ``length`` i.i.d. factors ``I + x E_ij`` with i != j, |x| <= b.

    The ordered pair is drawn as one index in ``[0, n(n-1))`` and ``x`` as
    one index in ``[0, 2b+1)``; ``x = 0`` is kept.
    """
    if n < 2 or b < 1 or length < 0:
        raise ValueError("need n >= 2, b >= 1, length >= 0")
    rng = _stream(rng)
    with _Recorder("unipotent", rng, {"n": n, "b": b, "l": length}) as rec:
        M = identity(n)
        rows_hit: set[int] = set()
        cols_hit: set[int] = set()
        factors: list[tuple[int, int, int]] = []
        pairs = n * (n - 1)
        for _ in range(length):
            idx = rng.below(pairs)
            i, r = divmod(idx, n - 1)
            j = r + (r >= i)
            x = rng.below(2 * b + 1) - b
            factors.append((i, j, x))
            if x:
                # M @ (I + x E_ij): column j += x * column i
                M[:, j] += x * M[:, i]
                rows_hit.add(i)
                cols_hit.add(j)
        # a row never used as a target i stays a row of the identity
        return rec.record(
            M,
            untouched_rows=sorted(set(range(n)) - rows_hit),
            untouched_columns=sorted(set(range(n)) - cols_hit),
            factors=factors,
        )


# ---------------------------------------------------------------------------
# Algorithm 3: random products of embedded small matrices


def embed_small(h: IntegerMatrix, indices: list[int] | tuple[int, ...], n: int) -> IntegerMatrix:
    """Place ``h`` on rows/columns ``indices`` of the n x n identity."""
    h = np.asarray(h, dtype=object)
    d = len(indices)
    if h.shape != (d, d):
        raise ValueError(f"h must be {d}x{d}")
    if len(set(indices)) != d or any(not 0 <= k < n for k in indices):
        raise ValueError(f"indices must be distinct and within range(0, {n})")
    if list(indices) != sorted(indices):
        raise ValueError("indices must be increasing")
    out = identity(n)
    ix = np.array(indices)
    out[np.ix_(ix, ix)] = h
    return out


def gen_embedded_product(
    n: int, d: int, T: int, length: int, rng: RngStream | int
) -> GenerationRecord:
    """Product of ``length`` embedded box-uniform d x d unimodular matrices."""
    if not 2 <= d <= 4:
        raise ValueError("d must be in 2..4 (the inner sampler is rejection-based)")
    if d >= n or T < 1 or length < 0:
        raise ValueError("need d < n, T >= 1, length >= 0")
    rng = _stream(rng)
    with _Recorder("embedded", rng, {"n": n, "d": d, "T": T, "l": length}) as rec:
        M = identity(n)
        touched: set[int] = set()
        for _ in range(length):
            ks = rng.subset(n, d)
            h, _ = sample_box_unimodular(rng, d, T)
            ix = np.array(ks)
            # M @ Phi(h) only mixes the selected columns
            M[:, ix] = M[:, ix].dot(h)
            touched.update(ks)
        return rec.record(M, touched_indices=sorted(touched))


# ---------------------------------------------------------------------------
# Algorithm 4: uniform bottom rows, Euclid + least squares top row


def gen_silverman(
    n: int, T: int, rng: RngStream | int, *, max_resamples: int = DEFAULT_RESAMPLES
) -> GenerationRecord:
    """Uniform bottom ``n-1`` rows, top row from Bezout on the minors, then reduced."""
    if n < 2 or T < 1:
        raise ValueError("need n >= 2 and T >= 1")
    rng = _stream(rng)
    with _Recorder("silverman", rng, {"n": n, "T": T}) as rec:
        gcds: list[int] = []
        for _ in range(max_resamples):
            bottom = _uniform_matrix(rng, n - 1, n, T)
            cof = cofactor_minor_vector(bottom)
            g = math.gcd(*cof)
            if g == 1:
                break
            gcds.append(g)
        else:
            raise GenerationError(
                f"minors never coprime in {max_resamples} draws; gcds seen: {sorted(set(gcds))[:10]}"
            )
        _, coeffs = extended_gcd_chain(cof)
        sign = rng.sign()
        top = [sign * c for c in coeffs]
        raw_top = list(top)
        top = least_squares_round_reduce(top, bottom)
        M = zeros(n)
        M[0, :] = top
        M[1:, :] = bottom
        return rec.record(M, det_sign=sign, resamples=len(gcds), rejected_gcds=gcds, raw_top=raw_top)


# ---------------------------------------------------------------------------
# Algorithm 5: unimodular factor of a Hermite decomposition


def unimodular_from_box(B: IntegerMatrix) -> IntegerMatrix:
    return hnf_column_decompose(B).unimodular


def gen_hnf(
    n: int,
    m: int,
    T: int,
    rng: RngStream | int,
    *,
    max_resamples: int = DEFAULT_RESAMPLES,
    B: IntegerMatrix | None = None,
) -> GenerationRecord:
    """Unimodular factor ``M`` of ``B = U M`` for a box-uniform m x n ``B``.

    ``B`` may be forced (tests); otherwise it is drawn and redrawn while
    rank-deficient.
    """
    if m < n or T < 1 or n < 1:
        raise ValueError("need m >= n >= 1 and T >= 1")
    rng = _stream(rng)
    with _Recorder("hnf", rng, {"n": n, "m": m, "T": T}) as rec:
        forced = B is not None
        for attempt in range(1, max_resamples + 1):
            if not forced:
                B = _uniform_matrix(rng, m, n, T)
            try:
                dec = hnf_column_decompose(B)
            except ValueError:
                if forced:
                    raise
                continue
            break
        else:
            raise GenerationError(f"B rank-deficient in all {max_resamples} draws")
        M = dec.unimodular
        agree = 0
        while agree < n and all(M[agree, j] == B[agree, j] for j in range(n)):
            agree += 1
        return rec.record(M, box=B, triangular=dec.triangular, leading_rows_agree=agree, attempts=attempt)


# ---------------------------------------------------------------------------
# DRS: permutations interleaved with block-diagonal A+/A- layers


def _even_permutation(rng: RngStream, n: int) -> list[int]:
    p = rng.permutation(n)
    seen = [False] * n
    parity = 0
    for i in range(n):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            parity ^= (length - 1) & 1
    if parity:
        p[0], p[1] = p[1], p[0]
    return p


def _apply_column_permutation(M: IntegerMatrix, p: list[int]) -> IntegerMatrix:
    # M @ P with P[i, p[i]] = 1: column p[i] of the product is column i of M
    out = np.empty_like(M)
    out[:, p] = M
    return out


def gen_drs(
    n: int, R: int, rng: RngStream | int, *, permutations: str = "alternating"
) -> GenerationRecord:
    """``P_1 g_1 P_2 g_2 ... P_R g_R P_{R+1}`` with block-diagonal ``g_i``.

    ``permutations`` is ``"alternating"`` (det +1 permutation matrices),
    ``"symmetric"`` (any permutation, each odd one composed with a sign flip
    of one column so the factor stays in SL), or ``"identity"`` (tests).
    """
    if n < 2 or n % 2 or R < 1:
        raise ValueError("need even n >= 2 and R >= 1")
    if permutations not in ("alternating", "symmetric", "identity"):
        raise ValueError(f"unknown permutation mode {permutations!r}")
    rng = _stream(rng)
    blocks = (np.array(A_PLUS, dtype=object), np.array(A_MINUS, dtype=object))

    def perm_factor(M: IntegerMatrix) -> IntegerMatrix:
        if permutations == "identity":
            return M
        if permutations == "alternating":
            return _apply_column_permutation(M, _even_permutation(rng, n))
        p = rng.permutation(n)
        out = _apply_column_permutation(M, p)
        if _parity(p):
            out[:, 0] = -out[:, 0]
        return out

    params: dict[str, Any] = {"n": n, "R": R}
    if permutations != "alternating":
        params["permutations"] = permutations
    with _Recorder("drs", rng, params) as rec:
        M = perm_factor(identity(n))
        choices: list[list[int]] = []
        for _ in range(R):
            layer = [rng.below(2) for _ in range(n // 2)]
            choices.append(layer)
            for t, c in enumerate(layer):
                cols = [2 * t, 2 * t + 1]
                M[:, cols] = M[:, cols].dot(blocks[c])
            M = perm_factor(M)
        return rec.record(M, block_choices=choices, permutations=permutations)


def _parity(p: list[int]) -> int:
    seen = [False] * len(p)
    parity = 0
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            parity ^= (length - 1) & 1
    return parity


# ---------------------------------------------------------------------------
# NTRU-shaped reference bases


def circulant_rows(x: list[int]) -> IntegerMatrix:
    """Row ``i`` is ``x`` rotated left by ``i`` (``X[i, j] = x[(i + j) % k]``)."""
    k = len(x)
    X = zeros(k)
    for i in range(k):
        X[i, :] = [x[(i + j) % k] for j in range(k)]
    return X


def gen_ntru_reference(
    n: int, q: int, rng: RngStream | int, *, coeffs: list[int] | None = None
) -> GenerationRecord:
    """``[[I, X], [0, q I]]`` with ``X`` circulant in ``x_j`` uniform on ``|x_j| <= q/2``."""
    if n < 2 or n % 2 or q < 2:
        raise ValueError("need even n >= 2 and q >= 2")
    rng = _stream(rng)
    k = n // 2
    half = q // 2
    with _Recorder("ntru", rng, {"n": n, "q": q}) as rec:
        if coeffs is None:
            coeffs = [rng.below(2 * half + 1) - half for _ in range(k)]
        elif len(coeffs) != k:
            raise ValueError(f"need {k} coefficients")
        M = zeros(n)
        for i in range(k):
            M[i, i] = 1
            M[k + i, k + i] = q
        M[:k, k:] = circulant_rows(list(coeffs))
        return rec.record(M, coeffs=list(coeffs))


GENERATORS = {
    "box": gen_box_rejection,
    "unipotent": gen_unipotent_product,
    "embedded": gen_embedded_product,
    "silverman": gen_silverman,
    "hnf": gen_hnf,
    "drs": gen_drs,
    "ntru": gen_ntru_reference,
}
