"""Gram-based LLL and BKZ with an exactly tracked unimodular transform."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from glnz.linalg import IntegerMatrix
from glnz.reduction.bkz import INSERT_RATIO, bkz, bkz_tour
from glnz.reduction.engine import (
    GramReducer,
    NotPositiveDefinite,
    ReductionTimeout,
    as_gram,
)
from glnz.reduction.enumeration import (
    ENUM_CAP,
    EnumerationTooLarge,
    enumerate_short,
    svp_enumerate_block,
)

DEFAULT_DELTA = 0.99
DEFAULT_MAX_ROUNDS = 64

__all__ = [
    "DEFAULT_DELTA",
    "ENUM_CAP",
    "INSERT_RATIO",
    "EnumerationTooLarge",
    "GramReducer",
    "NotPositiveDefinite",
    "ReductionResult",
    "ReductionTimeout",
    "StageRecord",
    "as_gram",
    "bkz",
    "bkz_reduce_gram",
    "bkz_tour",
    "enumerate_short",
    "lll_reduce_gram",
    "run_stage",
    "svp_enumerate_block",
]


@dataclass
class StageRecord:
    stage: str
    block_size: int | None
    seconds: float
    min_diag: int
    max_diag: int
    delta: float
    swaps: int = 0
    rounds: int = 0
    improving_rounds: int = 0
    converged: bool = True
    exact_fallbacks: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ReductionResult:
    reduced: IntegerMatrix
    transform: IntegerMatrix
    trace: list[StageRecord] = field(default_factory=list)


def run_stage(
    red: GramReducer,
    block_size: int | None,
    *,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    on_tour=None,
) -> StageRecord:
    """Run LLL (``block_size`` None) or BKZ-``block_size`` on ``red`` and record it."""
    t0 = time.perf_counter()
    swaps0, fb0 = red.swaps, red.exact_fallbacks
    rounds, improving, converged = 0, 0, True
    if block_size is None:
        red.lll(0)
        stage = "lll"
    else:
        rounds, improving, converged = bkz(red, block_size, max_rounds=max_rounds, on_tour=on_tour)
        stage = f"bkz-{block_size}"
    d = red.diag()
    return StageRecord(
        stage=stage,
        block_size=block_size,
        seconds=time.perf_counter() - t0,
        min_diag=min(d) if d else 0,
        max_diag=max(d) if d else 0,
        delta=red.delta,
        swaps=red.swaps - swaps0,
        rounds=rounds,
        improving_rounds=improving,
        converged=converged,
        exact_fallbacks=red.exact_fallbacks - fb0,
    )


def _deadline(timeout: float | None) -> float | None:
    return None if timeout is None else time.monotonic() + timeout


def lll_reduce_gram(G, delta: float = DEFAULT_DELTA, *, timeout: float | None = None) -> ReductionResult:
    """LLL-reduce the lattice with Gram matrix ``G``.

    The result is size-reduced (``|mu| <= 1/2``) and satisfies Lovász at
    ``delta``, both checked in exact integer arithmetic before returning.
    """
    red = GramReducer(G, delta, deadline=_deadline(timeout))
    rec = run_stage(red, None)
    G, U = red.exact()
    return ReductionResult(reduced=G, transform=U, trace=[rec])


def bkz_reduce_gram(
    G,
    beta: int,
    delta: float = DEFAULT_DELTA,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    *,
    timeout: float | None = None,
) -> ReductionResult:
    """LLL followed by BKZ-``beta`` tours until a clean tour or ``max_rounds``."""
    if not 2 <= beta <= ENUM_CAP:
        raise ValueError(f"block size must be in 2..{ENUM_CAP}, got {beta}")
    red = GramReducer(G, delta, deadline=_deadline(timeout))
    trace = [run_stage(red, None)]
    trace.append(run_stage(red, beta, max_rounds=max_rounds))
    G, U = red.exact()
    return ReductionResult(reduced=G, transform=U, trace=trace)
