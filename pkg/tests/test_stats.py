import math

import numpy as np
import pytest

from glnz.generators import gen_drs, gen_ntru_reference, gen_silverman, gen_unipotent_product
from glnz.linalg import as_matrix, gram_of, identity, matmul
from glnz.rng import RngStream
from glnz.stats import (
    BAND_RATIO_CAP,
    ENTROPY_COLUMNS,
    ZERO_ROW_BITS,
    band_ratio,
    entropy_summary,
    format_params,
    gram_log_heatmap,
    near_rank_profile,
    row_norm_bits,
    table_to_csv,
)

# calibration run (seeds 0-4): unipotent(64, 8, 2000) gave sigma2/sigma1 in
# [2.9e-7, 0.017], silverman(64, 8) gave [0.637, 0.783]
NEAR_RANK_THRESHOLD = 0.1


def test_row_bits_examples():
    s = row_norm_bits(identity(4))
    assert s.bits == (0.0,) * 4 and s.min == s.max == 0.0
    assert row_norm_bits(as_matrix([[3, 4]])).bits[0] == pytest.approx(math.log2(5))
    z = row_norm_bits(as_matrix([[0, 0], [1, 0]]))
    assert z.bits[0] == ZERO_ROW_BITS and z.bits[0] != 0.0 and z.max == 0.0


def test_row_bits_huge_rows():
    big = 1 << 3000
    assert row_norm_bits(as_matrix([[big, 0]])).bits[0] == pytest.approx(3000)


def test_row_bits_signed_column_permutation_invariant():
    M = gen_silverman(10, 3, 1).matrix
    Q = as_matrix([[0] * i + [(-1) ** i] + [0] * (9 - i) for i in range(10)])[::-1]
    assert row_norm_bits(matmul(M, Q)).bits == row_norm_bits(M).bits


def test_heatmap():
    h = gram_log_heatmap(identity(3))
    assert h.shape == (3, 3)
    assert (h.values == np.eye(3)).all()
    lines = h.to_csv().splitlines()
    assert len(lines) == 3 and lines[0] == "1.0,0.0,0.0"
    huge = gram_log_heatmap(as_matrix([[1 << 2000]]))
    assert huge.values[0, 0] == pytest.approx(2000)


def test_heatmap_relabels_under_permutation():
    G = gram_of(gen_silverman(8, 2, 0).matrix)
    p = RngStream(1).permutation(8)
    Gp = G[np.ix_(p, p)]
    assert (gram_log_heatmap(Gp).values == gram_log_heatmap(G).values[np.ix_(p, p)]).all()


def test_band_ratio_definition():
    G = as_matrix([[4, 1, 0], [1, 4, 3], [0, 3, 4]])
    grid = np.log2(1 + np.abs(np.array(G.tolist(), dtype=float)))
    inside = np.mean([grid[i, j] for i in range(3) for j in range(3) if abs(i - j) <= 1])
    outside = np.mean([grid[0, 2], grid[2, 0]])
    G[0, 2] = G[2, 0] = 1
    grid[0, 2] = grid[2, 0] = 1.0
    outside = 1.0
    inside = np.mean([grid[i, j] for i in range(3) for j in range(3) if abs(i - j) <= 1])
    assert band_ratio(G, 1) == pytest.approx(inside / outside)


def test_band_ratio_sentinel_and_bounds():
    assert band_ratio(identity(5), 1) == BAND_RATIO_CAP
    with pytest.raises(ValueError):
        band_ratio(identity(5), 0)
    with pytest.raises(ValueError):
        band_ratio(identity(5), 5)


def test_band_ratio_identity_permutation_invariance():
    G = gram_of(gen_silverman(12, 2, 3).matrix)
    p = list(range(12))
    assert band_ratio(G[np.ix_(p, p)], 3) == band_ratio(G, 3)


def test_band_ratio_detects_unpermuted_drs_blocks():
    # without the random permutations the DRS Gram is block diagonal
    G = gram_of(gen_drs(64, 4, 0, permutations="identity").matrix)
    assert band_ratio(G, 4) == BAND_RATIO_CAP
    assert band_ratio(gram_of(gen_drs(64, 4, 0).matrix), 4) < 2


def test_near_rank_identity_and_toy():
    prof = near_rank_profile(identity(4))
    assert np.allclose(prof.singular_values, 1) and prof.ratio == 1.0
    toy = near_rank_profile(as_matrix([[10, 10], [10, 11]]))
    # closed form: singular values of a symmetric matrix are |eigenvalues|
    lam = np.linalg.eigvalsh(np.array([[10.0, 10.0], [10.0, 11.0]]))
    assert toy.ratio == pytest.approx(min(abs(lam)) / max(abs(lam)))
    assert toy.ratio < 0.05


def test_near_rank_singular_value_product_is_det():
    for n in (8, 20, 32):
        s = near_rank_profile(gen_silverman(n, 2, n).matrix).singular_values
        assert abs(np.sum(np.log(s))) < 1e-6


def test_near_rank_huge_entries():
    M = gen_unipotent_product(12, 50, 2000, 1).matrix
    assert max(abs(int(v)) for v in M.flat).bit_length() > 1100
    prof = near_rank_profile(M)
    assert prof.scale_bits > 0
    assert np.all(np.isfinite(prof.singular_values)) and 0 <= prof.ratio <= 1
    assert math.log2(prof.singular_values[0]) + prof.scale_bits > 1000


def test_near_rank_non_unimodular_square():
    prof = near_rank_profile(as_matrix([[2, 0], [0, 3]]))
    assert np.allclose(prof.singular_values, [3, 2])


def test_near_rank_unipotent_vs_silverman_calibrated():
    for s in range(5):
        u = near_rank_profile(gen_unipotent_product(64, 8, 2000, s).matrix).ratio
        v = near_rank_profile(gen_silverman(64, 8, s).matrix).ratio
        print(f"seed {s}: unipotent {u:.3g}, silverman {v:.3g}")
        assert u < NEAR_RANK_THRESHOLD < v


def test_entropy_summary():
    assert entropy_summary([]) == []
    assert table_to_csv([]) == ",".join(ENTROPY_COLUMNS) + "\n"
    recs = [gen_ntru_reference(8, 16, 0), gen_unipotent_product(6, 1, 10, 0)]
    rows = entropy_summary(recs)
    assert [r["generator"] for r in rows] == ["ntru", "unipotent"]
    assert rows[0]["entropy_bits"] == pytest.approx(4 * math.log2(17))
    assert rows[1]["entropy_bits"] == pytest.approx(recs[1].entropy_bits)
    csv_text = table_to_csv(rows)
    assert csv_text.splitlines()[1].startswith("ntru,8,n=8;q=16,")


def test_format_params():
    assert format_params({"n": 5, "T": 2, "b": 1}) == "T=2;b=1;n=5"
    assert format_params({}) == ""
