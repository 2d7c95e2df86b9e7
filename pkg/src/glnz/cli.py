"""Command line: ``glnz {gen,gram,attack,stats,campaign}``.

Attack exit codes: 0 solved, 2 not solved (schedule exhausted), 3 timed
out. Any usage or input error exits with 1.

The attack report JSON has the fields ``n``, ``success``,
``stage_of_success`` (``"input"``, ``"lll"``, ``"bkz-<beta>"`` or null),
``timed_out``, ``exhausted``, ``equivalence_verified`` (null unless the input
was a basis), ``total_seconds``, ``delta``, ``schedule``, ``trace`` (one
object per completed stage) and ``recovered_transform`` (rows of decimal
strings, ``U`` with ``U G U^T`` reduced).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from glnz import cost
from glnz.campaign import HeavyTierError, PARAMS, ExperimentConfig, generate, run_campaign
from glnz.generators import GENERATORS, GenerationError
from glnz.io import read_matrix, record_to_json, write_json, write_matrix
from glnz.linalg import det_exact, gram_of
from glnz.recognition import AttackReport, run_attack_pipeline
from glnz.reduction import DEFAULT_DELTA, NotPositiveDefinite
from glnz.stats import band_ratio, gram_log_heatmap, near_rank_profile, row_norm_bits

EXIT_SOLVED = 0
EXIT_ERROR = 1
EXIT_NOT_SOLVED = 2
EXIT_TIMEOUT = 3
DEFAULT_BKZ_MIN = 3
DEFAULT_BKZ_MAX = 5
# determinants are printed by gen only up to this size
DET_CHECK_MAX_N = 300


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1 so that 2 keeps meaning "not solved"."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def exit_code(report: AttackReport) -> int:
    if report.success:
        return EXIT_SOLVED
    return EXIT_TIMEOUT if report.timed_out else EXIT_NOT_SOLVED


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _gen_params(args: argparse.Namespace) -> dict:
    params = {}
    for key in PARAMS[args.alg]:
        value = getattr(args, key)
        if value is None:
            raise CliError(f"--alg {args.alg} needs --{key}")
        params[key] = value
    if args.alg == "drs" and args.perms != "alternating":
        params["permutations"] = args.perms
    if args.alg == "box" and args.max_attempts is not None:
        params["max_attempts"] = args.max_attempts
    return params


def cmd_gen(args: argparse.Namespace) -> int:
    params = _gen_params(args)
    secs = cost.forecast_instance_seconds(args.alg, params)
    if cost.is_heavy(secs) and not args.heavy:
        raise CliError(
            f"{args.alg} with {params} is heavy tier (forecast ~{secs / 3600:.1f} CPU-hours "
            "to generate and attack); pass --heavy to proceed"
        )
    try:
        rec = generate(args.alg, params, args.seed)
    except GenerationError as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out)
    matrix_path = out.with_name(out.name + ".json")
    record_path = out.with_name(out.name + ".record.json")
    write_matrix(matrix_path, rec.matrix, kind="basis")
    write_json(record_path, record_to_json(rec))
    lengths = row_norm_bits(rec.matrix)
    print(f"wrote {matrix_path} and {record_path}")
    print(f"entropy_bits {rec.entropy_bits:.3f}")
    print(f"row_bits {lengths.min:.5f} {lengths.max:.5f}")
    if rec.n <= DET_CHECK_MAX_N:
        print(f"det {det_exact(rec.matrix)}")
    else:
        print("det skipped (n too large for a quick check)")
    print(f"seconds {rec.wall_time:.3f}")
    return 0


def _load_input(path: str, kind: str | None):
    try:
        M, file_kind = read_matrix(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except ValueError as exc:
        raise CliError(str(exc)) from None
    kind = kind or file_kind or "gram"
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise CliError(f"{path}: expected a square matrix, got {M.shape}")
    return M, kind


def cmd_gram(args: argparse.Namespace) -> int:
    M, _ = _load_input(args.input, "basis")
    write_matrix(args.out, gram_of(M), kind="gram")
    print(f"wrote {args.out}")
    return 0


def _schedule(args: argparse.Namespace) -> tuple[int, ...]:
    if args.schedule:
        try:
            return tuple(int(v) for v in args.schedule.split(","))
        except ValueError:
            raise CliError("--schedule takes comma-separated block sizes") from None
    return tuple(range(args.bkz_min, args.bkz_max + 1))


def cmd_attack(args: argparse.Namespace) -> int:
    M, kind = _load_input(args.input, args.kind)
    original = M if kind == "basis" else None
    G = gram_of(M) if kind == "basis" else M
    schedule = _schedule(args)
    bits = max((abs(int(v)).bit_length() for v in G.flat), default=0)
    secs = cost.forecast_attack_seconds(G.shape[0], bits, schedule)
    if cost.is_heavy(secs) and not args.heavy and args.timeout is None:
        raise CliError(
            f"attack forecast ~{secs / 3600:.1f} CPU-hours (heavy tier); pass --heavy or a --timeout budget"
        )
    try:
        report = run_attack_pipeline(
            G, schedule, args.delta, args.timeout, early_exit=args.early_exit, original=original
        )
    except (NotPositiveDefinite, ValueError) as exc:
        raise CliError(str(exc)) from None
    if args.out:
        write_json(args.out, report.to_dict())
    status = "solved" if report.success else ("timeout" if report.timed_out else "not solved within schedule")
    print(f"{status} stage={report.stage_of_success} seconds={report.total_seconds:.3f}")
    for rec in report.trace:
        print(f"  {rec.stage}: {rec.seconds:.3f}s diag {rec.min_diag}..{rec.max_diag}")
    if report.equivalence_verified is not None:
        print(f"equivalent to input basis up to signed permutation: {report.equivalence_verified}")
    return exit_code(report)


def cmd_stats(args: argparse.Namespace) -> int:
    M, kind = _load_input(args.input, args.kind)
    lengths = row_norm_bits(M)
    print(f"kind {kind}")
    print(f"row_bits {lengths.min:.5f} {lengths.max:.5f}")
    prof = near_rank_profile(M)
    print(f"sigma2_over_sigma1 {prof.ratio:.6g}")
    G = M if kind == "gram" else gram_of(M)
    if args.band is not None:
        print(f"band_ratio w={args.band} {band_ratio(G, args.band):.6g}")
    if args.heatmap:
        Path(args.heatmap).write_text(gram_log_heatmap(G).to_csv())
        print(f"wrote {args.heatmap}")
    return 0


def cmd_campaign(args: argparse.Namespace) -> int:
    try:
        config = ExperimentConfig.load(args.config)
    except FileNotFoundError:
        raise CliError(f"{args.config}: no such file") from None
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc)) from None
    try:
        summary = run_campaign(config, workers=args.workers, heavy=args.heavy or config.heavy, log=print)
    except HeavyTierError as exc:
        raise CliError(str(exc)) from None
    except OSError as exc:
        raise CliError(f"cannot write campaign output: {exc}") from None
    print(f"computed {summary.computed}, skipped {summary.skipped}, failed {summary.failed}; wrote {config.results}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="glnz", description="Random GL(n,Z) bases and Gram-based recognition of Z^n.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a unimodular basis")
    g.add_argument("--alg", required=True, choices=sorted(GENERATORS))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--T", type=int)
    g.add_argument("--b", type=int)
    g.add_argument("--l", type=int, help="product length")
    g.add_argument("--d", type=int)
    g.add_argument("--m", type=int, help="rows of the box matrix (hnf)")
    g.add_argument("--R", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--perms", default="alternating", choices=["alternating", "symmetric", "identity"])
    g.add_argument("--max-attempts", type=int, help="box: explicit attempt budget (lifts the size cap)")
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--out", default="instance", help="output prefix (writes PREFIX.json, PREFIX.record.json)")
    g.add_argument("--heavy", action="store_true")
    g.set_defaults(func=cmd_gen)

    gr = sub.add_parser("gram", help="Gram matrix of a basis file")
    gr.add_argument("--in", dest="input", required=True)
    gr.add_argument("--out", required=True)
    gr.set_defaults(func=cmd_gram)

    a = sub.add_parser("attack", help="LLL then BKZ until all norms are 1")
    a.add_argument("--in", dest="input", required=True)
    a.add_argument("--kind", choices=["basis", "gram"], help="override the file's kind")
    a.add_argument("--out", help="report JSON path")
    a.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    a.add_argument("--bkz-min", type=int, default=DEFAULT_BKZ_MIN)
    a.add_argument("--bkz-max", type=int, default=DEFAULT_BKZ_MAX)
    a.add_argument("--schedule", help="explicit block sizes, e.g. 3,4,5")
    a.add_argument("--timeout", type=float, help="CPU budget in seconds")
    a.add_argument("--early-exit", action="store_true", help="check for success after every BKZ tour")
    a.add_argument("--heavy", action="store_true")
    a.set_defaults(func=cmd_attack)

    s = sub.add_parser("stats", help="row lengths, spectrum, band structure")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--kind", choices=["basis", "gram"])
    s.add_argument("--band", type=int, help="bandwidth for band_ratio")
    s.add_argument("--heatmap", help="write log2(1+|G_ij|) grid as CSV")
    s.set_defaults(func=cmd_stats)

    c = sub.add_parser("campaign", help="run a JSON experiment config")
    c.add_argument("config")
    c.add_argument("--workers", type=int, help="overrides the GLNZ_WORKERS environment variable")
    c.add_argument("--heavy", action="store_true")
    c.set_defaults(func=cmd_campaign)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
