"""Rough CPU-time forecasts used to gate heavy runs behind ``--heavy``.

The forecast for attacking an n-dimensional instance whose Gram entries
have about ``bits`` bits is

    LLL_COEFF * n**4 * bits  +  sum over blocks beta of
    BKZ_COEFF * TOURS * n**2 * beta**(beta / 4)

The LLL term follows the usual swap-count bound (``n**2 * bits`` swaps,
each touching ``O(n**2)`` Gram-Schmidt data); the BKZ term charges every
tour ``n`` enumerations of growing cost. Entry sizes are forecast per
generator from parameters alone. Constants were fitted once on desk runs
(DRS 128/8, unipotent 128/1/3000, embedded 64/3/1/12800, Silverman 100/1)
and err on the slow side.
"""

from __future__ import annotations

import math

LLL_COEFF = 4e-9
BKZ_COEFF = 1e-6
TOURS = 8
HEAVY_SECONDS = 3600.0


def forecast_gram_bits(generator: str, params: dict) -> float:
    """Approximate bit size of the largest Gram entry of a generated instance."""
    n = int(params.get("n", 1))
    T = int(params.get("T", 1))
    if generator == "box":
        return 2 * math.log2(n * T * T + 1)
    if generator == "unipotent":
        b, length = int(params["b"]), int(params["l"])
        return 2 * (1.5 + 0.55 * length / n * math.log2(2 * b + 1) / math.log2(3))
    if generator == "embedded":
        d, length = int(params["d"]), int(params["l"])
        return 2 * (1.5 + 0.6 * length * d / (3 * n) * math.log2(2 * T + 1) / math.log2(3))
    if generator == "silverman":
        return 2 * math.log2(n * T + 1) + 2
    if generator == "hnf":
        return 2 * n * math.log2(2 * T + 2)
    if generator == "drs":
        return 2 * (1.2 * int(params["R"]) + 1)
    if generator == "ntru":
        return 2 * math.log2(int(params["q"]) * n + 1)
    raise ValueError(f"unknown generator {generator!r}")


def forecast_attack_seconds(n: int, gram_bits: float, schedule=(3, 4, 5)) -> float:
    total = LLL_COEFF * n**4 * max(gram_bits, 1.0)
    for beta in schedule:
        total += BKZ_COEFF * TOURS * n**2 * beta ** (beta / 4)
    return total


def forecast_generation_seconds(generator: str, params: dict) -> float:
    n = int(params.get("n", 1))
    if generator == "unipotent":
        return 2e-6 * int(params["l"]) * n
    if generator == "embedded":
        return 1e-5 * int(params["l"]) * n
    if generator == "drs":
        return 1e-6 * int(params["R"]) * n * n
    if generator == "hnf":
        return 1e-6 * int(params.get("m", n)) * n**3
    return 1e-6 * n**3


def forecast_instance_seconds(generator: str, params: dict, schedule=(3, 4, 5)) -> float:
    """Generation plus attack with ``schedule``."""
    n = int(params.get("n", 1))
    bits = forecast_gram_bits(generator, params)
    return forecast_generation_seconds(generator, params) + forecast_attack_seconds(n, bits, schedule)


def is_heavy(seconds: float) -> bool:
    return seconds > HEAVY_SECONDS
