"""Grid campaigns: generate, attack and tabulate, resumably.

Every finished trial is appended as one JSON line to the records file by
the main process. A trial is identified by a key hashed from its generator,
parameters, seed and attack settings; on restart, trials whose key is
already recorded are skipped and a torn last line is discarded.

Trial seeds are ``derive_seed(campaign_seed, cell_index, trial_index)``:
the first 8 bytes (big-endian) of SHA-256 over the parts joined by ``/``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from glnz.cost import forecast_instance_seconds, is_heavy
from glnz.generators import GENERATORS, GenerationRecord
from glnz.io import dumps, jsonable, matrix_digest
from glnz.linalg import gram_of
from glnz.recognition import DEFAULT_SCHEDULE, run_attack_pipeline
from glnz.reduction import DEFAULT_DELTA
from glnz.rng import RngStream, derive_seed
from glnz.stats import format_params, row_norm_bits

WORKERS_ENV = "GLNZ_WORKERS"
CSV_COLUMNS = ("n", "params", "shortest_bits", "longest_bits", "found", "stage", "seconds")

# positional parameters of each generator, in call order
PARAMS = {
    "box": ("n", "T"),
    "unipotent": ("n", "b", "l"),
    "embedded": ("n", "d", "T", "l"),
    "silverman": ("n", "T"),
    "hnf": ("n", "m", "T"),
    "drs": ("n", "R"),
    "ntru": ("n", "q"),
}
OPTIONAL_PARAMS = {"box": ("max_attempts",), "drs": ("permutations",)}


class HeavyTierError(RuntimeError):
    """The requested work is forecast above the heavy-tier threshold."""


def generate(generator: str, params: dict, seed: int) -> GenerationRecord:
    """Call the named generator with ``params`` and a fresh stream at ``seed``."""
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}; choose from {sorted(GENERATORS)}")
    missing = [k for k in PARAMS[generator] if k not in params]
    if missing:
        raise ValueError(f"{generator} needs parameters {missing}")
    extra = set(params) - set(PARAMS[generator]) - set(OPTIONAL_PARAMS.get(generator, ()))
    if extra:
        raise ValueError(f"{generator} does not take parameters {sorted(extra)}")
    args = [params[k] for k in PARAMS[generator]]
    kwargs = {k: params[k] for k in OPTIONAL_PARAMS.get(generator, ()) if k in params}
    return GENERATORS[generator](*args, RngStream(seed), **kwargs)


@dataclass
class ExperimentConfig:
    generator: str
    grid: dict[str, list] = field(default_factory=dict)
    fixed: dict[str, Any] = field(default_factory=dict)
    seeds_per_cell: int = 3
    campaign_seed: int = 0
    delta: float = DEFAULT_DELTA
    schedule: list[int] = field(default_factory=lambda: list(DEFAULT_SCHEDULE))
    timeout: float | None = None
    early_exit: bool = False
    results: str = "results.csv"
    records: str = "records.jsonl"
    heavy: bool = False

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        cfg = cls(**data)
        if cfg.generator not in GENERATORS:
            raise ValueError(f"unknown generator {cfg.generator!r}")
        if cfg.seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be at least 1")
        if base is not None:
            cfg.results = str(base / cfg.results)
            cfg.records = str(base / cfg.records)
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(data, base=path.parent)

    def cells(self) -> list[dict]:
        """Parameter dicts of the grid, in the order the keys were given."""
        if not self.grid:
            return []
        keys = list(self.grid)
        return [{**self.fixed, **dict(zip(keys, combo))} for combo in itertools.product(*(self.grid[k] for k in keys))]

    def trials(self) -> list[dict]:
        out = []
        for ci, params in enumerate(self.cells()):
            for t in range(self.seeds_per_cell):
                seed = derive_seed(self.campaign_seed, ci, t)
                out.append({"cell": ci, "trial": t, "params": params, "seed": seed, "key": self.trial_key(params, seed)})
        return out

    def trial_key(self, params: dict, seed: int) -> str:
        ident = {
            "generator": self.generator,
            "params": jsonable(params),
            "seed": str(seed),
            "delta": self.delta,
            "schedule": list(self.schedule),
            "timeout": self.timeout,
            "early_exit": self.early_exit,
        }
        return hashlib.sha256(dumps(ident).encode()).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_trial(generator: str, trial: dict, delta: float, schedule: list[int], timeout, early_exit: bool) -> dict:
    """Generate one instance and attack it; never raises."""
    record: dict[str, Any] = {
        "key": trial["key"],
        "cell": trial["cell"],
        "trial": trial["trial"],
        "generator": generator,
        "params": jsonable(trial["params"]),
        "seed": str(trial["seed"]),
        "started": _now(),
        "error": None,
    }
    try:
        rec = generate(generator, trial["params"], trial["seed"])
        lengths = row_norm_bits(rec.matrix)
        report = run_attack_pipeline(
            gram_of(rec.matrix), schedule, delta, timeout, early_exit=early_exit, original=rec.matrix
        )
        record.update(
            n=rec.n,
            matrix_sha256=matrix_digest(rec.matrix),
            entropy_bits=rec.entropy_bits,
            shortest_bits=lengths.min,
            longest_bits=lengths.max,
            found=report.success,
            stage=report.stage_of_success,
            timed_out=report.timed_out,
            exhausted=report.exhausted,
            equivalence_verified=report.equivalence_verified,
            seconds=report.total_seconds,
            trace=[s.to_dict() for s in report.trace],
        )
    except Exception as exc:  # recorded, the campaign carries on
        record.update(n=trial["params"].get("n"), found=False, stage=None, seconds=None, error=f"{type(exc).__name__}: {exc}")
    record["finished"] = _now()
    return record


def load_records(path: str | Path) -> list[dict]:
    """Completed records; a torn final line from an interruption is dropped from the file."""
    path = Path(path)
    if not path.exists():
        return []
    lines = path.read_text().splitlines(keepends=True)
    good: list[dict] = []
    kept = 0
    for i, line in enumerate(lines):
        try:
            good.append(json.loads(line))
            kept += len(line)
        except json.JSONDecodeError:
            if i != len(lines) - 1:
                raise ValueError(f"{path}: corrupt record on line {i + 1}") from None
            with path.open("r+") as fh:
                fh.truncate(kept)
    return good


def _bits(v) -> str:
    return "" if v is None else f"{v:.5f}"


def results_csv(records: list[dict]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in sorted(records, key=lambda r: (r["cell"], r["trial"])):
        writer.writerow(
            [
                r.get("n", ""),
                format_params({k: v for k, v in r["params"].items() if k != "n"}),
                _bits(r.get("shortest_bits")),
                _bits(r.get("longest_bits")),
                "true" if r.get("found") else "false",
                r.get("stage") or ("error" if r.get("error") else "timeout" if r.get("timed_out") else "none"),
                "" if r.get("seconds") is None else f"{r['seconds']:.3f}",
            ]
        )
    return out.getvalue()


@dataclass
class CampaignSummary:
    computed: int
    skipped: int
    failed: int
    records: list[dict]


def worker_count(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(1, explicit)
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer") from None


def run_campaign(
    config: ExperimentConfig,
    *,
    workers: int | None = None,
    heavy: bool | None = None,
    log: Callable[[str], None] = lambda msg: None,
) -> CampaignSummary:
    """Run every not-yet-recorded trial of ``config`` and rewrite the results CSV."""
    heavy = config.heavy if heavy is None else heavy
    trials = config.trials()
    if not heavy:
        too_big = []
        for params in config.cells():
            secs = forecast_instance_seconds(config.generator, params, config.schedule)
            if is_heavy(secs):
                too_big.append(f"{format_params(params)} (~{secs / 3600:.1f} CPU-hours)")
        if too_big:
            raise HeavyTierError("heavy-tier cells need the heavy flag: " + ", ".join(too_big))
    records_path = Path(config.records)
    records_path.parent.mkdir(parents=True, exist_ok=True)
    done = load_records(records_path)
    done_keys = {r["key"] for r in done}
    todo = [t for t in trials if t["key"] not in done_keys]
    log(f"{len(trials)} trials, {len(trials) - len(todo)} already recorded, {len(todo)} to run")
    new: list[dict] = []
    args = (config.generator,)
    tail = (config.delta, list(config.schedule), config.timeout, config.early_exit)

    def append(rec: dict) -> None:
        with records_path.open("a") as fh:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        new.append(rec)
        status = "error" if rec["error"] else ("found" if rec["found"] else "not found")
        log(f"cell {rec['cell']} trial {rec['trial']}: {status}")

    n_workers = worker_count(workers)
    t0 = time.perf_counter()
    if n_workers == 1 or len(todo) <= 1:
        for t in todo:
            append(run_trial(*args, t, *tail))
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(run_trial, *args, t, *tail) for t in todo]
            for fut in futures:
                append(fut.result())
    log(f"campaign pass took {time.perf_counter() - t0:.1f}s")
    all_records = done + new
    wanted = {t["key"] for t in trials}
    Path(config.results).parent.mkdir(parents=True, exist_ok=True)
    Path(config.results).write_text(results_csv([r for r in all_records if r["key"] in wanted]))
    return CampaignSummary(
        computed=len(new),
        skipped=len(trials) - len(todo),
        failed=sum(1 for r in new if r["error"]),
        records=all_records,
    )
