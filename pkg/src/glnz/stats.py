"""Measurements on bases and Gram matrices: row lengths, heatmaps, bands, spectra."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from glnz.generators import GenerationRecord
from glnz.linalg import row_sq_norms, unimodular_inverse

# log2 length reported for an all-zero row; log2 of a unit row is 0.0
ZERO_ROW_BITS = float("-inf")
# band_ratio when every off-band entry is zero
BAND_RATIO_CAP = 1e9


def _log2_int(v: int) -> float:
    """``log2(v)`` for a positive int of any size."""
    v = int(v)
    shift = max(v.bit_length() - 64, 0)
    return math.log2(v >> shift) + shift


@dataclass(frozen=True)
class RowLengthSummary:
    bits: tuple[float, ...]
    min: float
    max: float

    def to_dict(self) -> dict:
        return {"bits": list(self.bits), "min": self.min, "max": self.max}


def row_norm_bits(M) -> RowLengthSummary:
    """``log2`` of each row's Euclidean length, from exact squared norms."""
    bits = tuple(0.5 * _log2_int(s) if s else ZERO_ROW_BITS for s in row_sq_norms(np.asarray(M, dtype=object)))
    if not bits:
        return RowLengthSummary(bits=(), min=math.nan, max=math.nan)
    return RowLengthSummary(bits=bits, min=min(bits), max=max(bits))


@dataclass(frozen=True)
class HeatmapGrid:
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        for row in self.values:
            writer.writerow([repr(float(v)) for v in row])
        return out.getvalue()


def _log_magnitude(v) -> float:
    v = abs(int(v))
    # log2(1 + v) without float overflow for huge entries
    return math.log2(1 + v) if v < 1 << 1000 else _log2_int(v)


def gram_log_heatmap(G) -> HeatmapGrid:
    """Grid of ``log2(1 + |G_ij|)``."""
    A = np.asarray(G, dtype=object)
    vals = np.array([[_log_magnitude(v) for v in row] for row in A], dtype=float).reshape(A.shape)
    return HeatmapGrid(values=vals)


def band_ratio(G, w: int) -> float:
    """Mean heatmap value over ``|i - j| <= w`` divided by the mean over ``|i - j| > w``.

    Returns :data:`BAND_RATIO_CAP` when the off-band mean is zero.
    """
    grid = gram_log_heatmap(G).values
    n = grid.shape[0]
    if not 1 <= w < n:
        raise ValueError(f"bandwidth must satisfy 1 <= w < n={n}, got {w}")
    i, j = np.indices(grid.shape)
    band = np.abs(i - j) <= w
    inside = grid[band].mean()
    outside = grid[~band].mean()
    if outside == 0:
        return BAND_RATIO_CAP
    return float(min(inside / outside, BAND_RATIO_CAP))


# square matrices up to this size get their small singular values from the
# exact inverse when they are unimodular
INVERSE_TAIL_MAX_N = 64


@dataclass(frozen=True)
class NearRankProfile:
    """``singular_values * 2**scale_bits`` are the singular values (descending).

    ``scale_bits`` is nonzero only for entries too large for float64.
    """

    singular_values: np.ndarray
    ratio: float  # sigma_2 / sigma_1
    scale_bits: int = 0


def _to_float_scaled(M: np.ndarray) -> tuple[np.ndarray, int]:
    """Float copy of ``M`` divided by ``2**shift`` so every entry is finite."""
    top = max((abs(int(v)).bit_length() for v in M.flat), default=0)
    shift = max(top - 900, 0)
    F = np.array([[float(int(v) >> shift) if shift else float(v) for v in row] for row in M], dtype=float)
    return F.reshape(M.shape), shift


def _merge_with_inverse(s: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Refine the small singular values of a unimodular ``A`` via ``A^{-1}``.

    ``sigma_i(A) = 1 / sigma_{n+1-i}(A^{-1})``, and float SVD resolves each
    matrix's large singular values to full relative precision, so every
    value is taken from whichever side carries the smaller error estimate.
    """
    try:
        inv = unimodular_inverse(A)
    except ValueError:
        return s
    Finv, shift = _to_float_scaled(inv)
    if shift:
        return s
    t = np.linalg.svd(Finv, compute_uv=False)
    if not np.all(t > 0):
        return s
    b = 1.0 / t[::-1]
    # relative error scales like sigma_1 / s_i on one side and tau_1 / t_i on the other
    err_direct = s[0] / np.maximum(s, np.finfo(float).tiny)
    err_inverse = t[0] * b
    return np.where(err_direct <= err_inverse, s, b)


def near_rank_profile(M) -> NearRankProfile:
    """Singular values of ``M`` (descending) and ``sigma_2 / sigma_1``.

    A small ratio means ``M`` is close to a rank-one matrix.
    """
    A = np.asarray(M, dtype=object)
    F, shift = _to_float_scaled(A)
    s = np.linalg.svd(F, compute_uv=False)
    if not shift and A.ndim == 2 and A.shape[0] == A.shape[1] and 1 < A.shape[0] <= INVERSE_TAIL_MAX_N:
        s = _merge_with_inverse(s, A)
    ratio = float(s[1] / s[0]) if len(s) > 1 and s[0] > 0 else math.nan
    return NearRankProfile(singular_values=s, ratio=ratio, scale_bits=shift)


ENTROPY_COLUMNS = ("generator", "n", "params", "seed", "entropy_bits", "nonzero_fraction", "shortest_bits", "longest_bits")


def entropy_summary(records: Iterable[GenerationRecord]) -> list[dict]:
    """One row per record: random bits drawn, density and row-length range."""
    rows = []
    for rec in records:
        M = rec.matrix
        lengths = row_norm_bits(M)
        nonzero = sum(1 for v in M.flat if v) / M.size if M.size else 0.0
        rows.append(
            {
                "generator": rec.generator,
                "n": rec.n,
                "params": format_params(rec.params),
                "seed": rec.seed,
                "entropy_bits": rec.entropy_bits,
                "nonzero_fraction": nonzero,
                "shortest_bits": lengths.min,
                "longest_bits": lengths.max,
            }
        )
    return rows


def format_params(params: dict) -> str:
    """Compact ``k=v;k=v`` rendering (sorted keys) used in tables."""
    return ";".join(f"{k}={params[k]}" for k in sorted(params))


def table_to_csv(rows: list[dict], columns: Iterable[str] = ENTROPY_COLUMNS) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return out.getvalue()
