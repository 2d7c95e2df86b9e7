"""Deciding from a Gram matrix whether a lattice is isometric to Z^n.

Given ``G = M M^T`` with ``M`` unimodular, reduction is run in stages (LLL,
then BKZ with growing block size). As soon as every reduced basis vector
has norm 1 the transform ``U`` satisfies ``U G U^T = I`` and ``U^{-1}`` is a
basis equal to ``M`` up to a signed permutation of columns.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from glnz.linalg import (
    IntegerMatrix,
    as_matrix,
    det_exact,
    identity,
    is_signed_permutation,
    matmul,
    to_lists,
    unimodular_inverse,
)
from glnz.reduction import (
    DEFAULT_DELTA,
    DEFAULT_MAX_ROUNDS,
    GramReducer,
    ReductionResult,
    ReductionTimeout,
    StageRecord,
    as_gram,
    run_stage,
)

DEFAULT_SCHEDULE = (3, 4, 5)

# Cartan matrix of E8: even unimodular, minimum norm 2, so no vector of norm 1
E8_GRAM = as_matrix(
    [
        [2, -1, 0, 0, 0, 0, 0, 0],
        [-1, 2, -1, 0, 0, 0, 0, 0],
        [0, -1, 2, -1, 0, 0, 0, 0],
        [0, 0, -1, 2, -1, 0, 0, 0],
        [0, 0, 0, -1, 2, -1, 0, -1],
        [0, 0, 0, 0, -1, 2, -1, 0],
        [0, 0, 0, 0, 0, -1, 2, 0],
        [0, 0, 0, 0, -1, 0, 0, 2],
    ]
)


@dataclass
class AttackReport:
    """Outcome of :func:`run_attack_pipeline`.

    ``timed_out`` and ``exhausted`` are the two distinct ways of not
    succeeding: the budget ran out, or every scheduled stage finished.
    """

    n: int
    success: bool
    stage_of_success: str | None
    recovered_transform: IntegerMatrix
    equivalence_verified: bool | None
    total_seconds: float
    trace: list[StageRecord] = field(default_factory=list)
    timed_out: bool = False
    exhausted: bool = False
    delta: float = DEFAULT_DELTA
    schedule: tuple[int, ...] = DEFAULT_SCHEDULE

    @property
    def recovered_basis(self) -> IntegerMatrix | None:
        """``U^{-1}``, whose Gram matrix is the input when the attack succeeded."""
        if not self.success:
            return None
        return unimodular_inverse(self.recovered_transform)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "success": self.success,
            "stage_of_success": self.stage_of_success,
            "timed_out": self.timed_out,
            "exhausted": self.exhausted,
            "equivalence_verified": self.equivalence_verified,
            "total_seconds": self.total_seconds,
            "delta": self.delta,
            "schedule": list(self.schedule),
            "trace": [rec.to_dict() for rec in self.trace],
            "recovered_transform": [[str(v) for v in row] for row in to_lists(self.recovered_transform)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AttackReport":
        return cls(
            n=int(data["n"]),
            success=bool(data["success"]),
            stage_of_success=data["stage_of_success"],
            recovered_transform=as_matrix([[int(v) for v in row] for row in data["recovered_transform"]]),
            equivalence_verified=data["equivalence_verified"],
            total_seconds=float(data["total_seconds"]),
            trace=[StageRecord(**rec) for rec in data["trace"]],
            timed_out=bool(data["timed_out"]),
            exhausted=bool(data["exhausted"]),
            delta=float(data["delta"]),
            schedule=tuple(data["schedule"]),
        )


def _unit_diagonal(G: IntegerMatrix) -> bool:
    n = G.shape[0]
    if not all(G[i, i] == 1 for i in range(n)):
        return False
    # integral and positive definite with unit diagonal forces the identity
    assert (G == identity(n)).all(), "unit diagonal Gram matrix is not the identity"
    return True


def check_zn_success(result: ReductionResult | IntegerMatrix) -> bool:
    """True iff every reduced basis vector has norm 1 (the Gram is then ``I``)."""
    G = result.reduced if isinstance(result, ReductionResult) else np.asarray(result, dtype=object)
    return _unit_diagonal(G)


def verify_signed_perm_equivalence(M_original, M_recovered) -> bool:
    """True iff ``M_original^{-1} M_recovered`` is a signed permutation."""
    A = as_matrix(M_original)
    B = as_matrix(M_recovered)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    for name, X in (("original", A), ("recovered", B)):
        if abs(det_exact(X)) != 1:
            raise ValueError(f"{name} basis is not unimodular")
    return is_signed_permutation(matmul(unimodular_inverse(A), B))


def run_attack_pipeline(
    G,
    schedule: tuple[int, ...] | list[int] = DEFAULT_SCHEDULE,
    delta: float = DEFAULT_DELTA,
    timeout: float | None = None,
    *,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    early_exit: bool = False,
    original: IntegerMatrix | None = None,
) -> AttackReport:
    """LLL, then BKZ at each block size of ``schedule``, stopping at success.

    Success is checked after every complete stage; with ``early_exit`` it is
    also checked after every BKZ tour. When ``original`` (the secret ``M``)
    is given, a success is cross-checked against it.
    """
    t0 = time.perf_counter()
    G = as_gram(G)
    n = G.shape[0]
    schedule = tuple(int(b) for b in schedule)
    deadline = None if timeout is None else time.monotonic() + timeout
    red = GramReducer(G, delta, deadline=deadline)
    report = AttackReport(
        n=n,
        success=False,
        stage_of_success=None,
        recovered_transform=identity(n),
        equivalence_verified=None,
        total_seconds=0.0,
        delta=float(delta),
        schedule=schedule,
    )

    def finish() -> AttackReport:
        _, U = red.exact()
        report.recovered_transform = U
        if report.success and original is not None:
            # M^{-1} U^{-1} is a signed permutation iff U M is; this avoids two inversions
            report.equivalence_verified = is_signed_permutation(matmul(U, as_matrix(original)))
        report.total_seconds = time.perf_counter() - t0
        return report

    if _unit_diagonal(G):
        report.success, report.stage_of_success = True, "input"
        return finish()

    def solved(r: GramReducer) -> bool:
        return all(r.G[i, i] == 1 for i in range(r.n))

    stages: list[int | None] = [None, *schedule]
    try:
        for block in stages:
            on_tour = solved if early_exit and block is not None else None
            rec = run_stage(red, block, max_rounds=max_rounds, on_tour=on_tour)
            report.trace.append(rec)
            if _unit_diagonal(red.G):
                report.success, report.stage_of_success = True, rec.stage
                return finish()
    except ReductionTimeout:
        report.timed_out = True
        return finish()
    report.exhausted = True
    return finish()
