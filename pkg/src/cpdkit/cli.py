"""Command-line interface: detect changepoints in a CSV series, score two
configurations against each other, and run the Monte-Carlo benchmark.

Exit codes: 0 success, 2 unreadable file, 3 bad file content (named line),
4 invalid method or benchmark configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    TeethSpec,
    VALID_METHODS,
    format_table,
    run_method,
    run_null_study,
    run_signal_study,
    write_csv,
)
from .core import ChangepointConfig, TimeSeries, mad_sigma, segment_means, universal_threshold
from .distance import config_distance
from .penlik import select_bic, select_mbic

EXIT_OK = 0
EXIT_UNREADABLE = 2
EXIT_BAD_CONTENT = 3
EXIT_BAD_CONFIG = 4

DEFAULT_MASTER_SEED = 12345
TABLE1_METHODS = ("bic", "mbic", "wbs", "wbs2-sdll")
TABLE1_LENGTHS = (100, 500)
TABLE1_REPS = 1000


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def read_series_file(path: str) -> TimeSeries:
    """One numeric value per line, or comma-separated time,value rows (second
    column used); an optional non-numeric first line is treated as a header."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_UNREADABLE)

    values: list[float] = []
    first_data_line = True
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        cell = cells[1] if len(cells) >= 2 else cells[0]
        value = _parse_float(cell)
        if value is None:
            if first_data_line:
                first_data_line = False  # header row
                continue
            raise CliError(f"{path}: non-numeric value on line {lineno}: {line!r}",
                           EXIT_BAD_CONTENT)
        first_data_line = False
        values.append(value)

    try:
        return TimeSeries(values)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_BAD_CONTENT)


def read_changepoint_file(path: str, series_length: int) -> ChangepointConfig:
    """Strictly increasing integer changepoint times in (1, series_length]."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_UNREADABLE)

    times: list[int] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            t = int(line)
        except ValueError:
            raise CliError(f"{path}: non-integer time on line {lineno}: {line!r}",
                           EXIT_BAD_CONTENT)
        if not 2 <= t <= series_length:
            raise CliError(
                f"{path}: time {t} on line {lineno} outside [2, {series_length}]",
                EXIT_BAD_CONTENT,
            )
        times.append(t)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise CliError(f"{path}: times must be strictly increasing", EXIT_BAD_CONTENT)
    return ChangepointConfig(times=tuple(times), series_length=series_length)


def _method_params(args) -> dict:
    return {
        "binseg": {"c": args.threshold_c, "min_len": args.min_len},
        "wbs": {"c": args.threshold_c, "m_intervals": args.intervals,
                "min_span": args.min_span},
        "wbs2-sdll": {"m_stage": args.m_stage, "lam": args.sdll_lambda,
                      "floor_mult": args.floor_mult},
        "bic": {"min_seg": args.min_seg},
        "mbic": {"min_seg": args.min_seg},
    }


def cmd_detect(args) -> int:
    if args.method not in VALID_METHODS:
        print(
            f"unknown method {args.method!r}; valid methods: {', '.join(VALID_METHODS)}",
            file=sys.stderr,
        )
        return EXIT_BAD_CONFIG
    series = read_series_file(args.input)
    params = _method_params(args)[args.method]
    config = run_method(args.method, series, args.seed, params)

    result: dict = {
        "method": args.method,
        "n_obs": len(series),
        "seed": args.seed,
        "sigma_hat": mad_sigma(series),
    }
    if args.method in ("binseg", "wbs"):
        result["threshold"] = universal_threshold(series, args.threshold_c)
    elif args.method == "wbs2-sdll":
        result["threshold"] = universal_threshold(series, args.sdll_lambda)
    else:
        select = select_bic if args.method == "bic" else select_mbic
        fit = select(series, min_seg=args.min_seg)
        # a perfect fit has objective -inf, which JSON cannot carry
        result["objective"] = fit.objective if not fit.degenerate else None
        result["rss"] = fit.rss
        result["degenerate"] = fit.degenerate
    result["n_changepoints"] = config.count
    result["changepoints"] = list(config.times)
    result["segment_means"] = segment_means(series, config)

    text = json.dumps(result, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_distance(args) -> int:
    if args.length < 2:
        raise CliError(f"--length must be at least 2, got {args.length}", EXIT_BAD_CONFIG)
    truth = read_changepoint_file(args.truth, args.length)
    estimate = read_changepoint_file(args.estimate, args.length)
    total = config_distance(truth, estimate)
    count_term = abs(truth.count - estimate.count)
    assignment_term = total - count_term
    print(f"count_term: {count_term}")
    print(f"assignment_term: {assignment_term:.6f}")
    print(f"distance: {total:.6f}")
    return EXIT_OK


def _bench_config_error(field: str, message: str) -> CliError:
    return CliError(f"invalid benchmark configuration ({field}): {message}", EXIT_BAD_CONFIG)


def cmd_bench(args) -> int:
    methods = list(args.methods) if args.methods else list(TABLE1_METHODS)
    lengths = list(args.lengths) if args.lengths else list(TABLE1_LENGTHS)
    reps = args.reps if args.reps is not None else (TABLE1_REPS if args.table1 else 100)

    for m in methods:
        if m not in VALID_METHODS:
            raise _bench_config_error(
                "methods", f"unknown method {m!r}; valid methods: {', '.join(VALID_METHODS)}"
            )
    if reps < 1:
        raise _bench_config_error("reps", f"need at least 1 replication, got {reps}")
    for length in lengths:
        if length < 10:
            raise _bench_config_error("lengths", f"need lengths >= 10, got {length}")
    if args.jobs < 1:
        raise _bench_config_error("jobs", f"need at least 1 job, got {args.jobs}")

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _bench_config_error("out", f"cannot create {out_dir}: {exc}")

    method_params = _method_params(args)
    report = run_null_study(
        methods, lengths, reps, args.seed, method_params=method_params, n_jobs=args.jobs
    )
    table = format_table(report)
    sys.stdout.write("Null study (no true changepoints)\n" + table)
    (out_dir / "null_table.txt").write_text(table, encoding="utf-8")
    write_csv(report, out_dir / "null_results.csv")

    if args.signal:
        spec = TeethSpec(
            length=args.teeth_length,
            period=args.teeth_period,
            amplitude=args.teeth_amplitude,
            sigma=args.teeth_sigma,
        )
        sig_report = run_signal_study(
            spec, methods, reps, args.seed, method_params=method_params, n_jobs=args.jobs
        )
        sig_table = format_table(sig_report)
        sys.stdout.write("\nSignal study (teeth truth)\n" + sig_table)
        (out_dir / "signal_table.txt").write_text(sig_table, encoding="utf-8")
        write_csv(sig_report, out_dir / "signal_results.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpdkit",
        description="Changepoint detection, configuration scoring, and benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="detect changepoints in a CSV series")
    p_detect.add_argument("input", help="CSV file: one value per line or time,value rows")
    p_detect.add_argument("--method", required=True,
                          help=f"one of: {', '.join(VALID_METHODS)}")
    p_detect.add_argument("--out", help="write the JSON result here instead of stdout")
    p_detect.add_argument("--seed", type=int, default=0, help="detector seed")
    _add_detector_flags(p_detect)
    p_detect.set_defaults(func=cmd_detect)

    p_dist = sub.add_parser("distance", help="score two changepoint lists")
    p_dist.add_argument("truth", help="file with one changepoint time per line")
    p_dist.add_argument("estimate", help="file with one changepoint time per line")
    p_dist.add_argument("--length", type=int, required=True,
                        help="series length T both configurations refer to")
    p_dist.set_defaults(func=cmd_distance)

    p_bench = sub.add_parser("bench", help="run the Monte-Carlo benchmark")
    p_bench.add_argument("--table1", action="store_true",
                         help="standard null study: bic, mbic, wbs, wbs2-sdll at "
                              "T=100,500 with 1000 replications")
    p_bench.add_argument("--methods", nargs="+", help="methods to benchmark")
    p_bench.add_argument("--lengths", nargs="+", type=int, help="series lengths")
    p_bench.add_argument("--reps", type=int, help="replications per cell")
    p_bench.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED,
                         help="master seed for the study")
    p_bench.add_argument("--out", default=".", help="output directory for report files")
    p_bench.add_argument("--jobs", type=int, default=1,
                         help="parallel worker processes for replications")
    p_bench.add_argument("--signal", action="store_true",
                         help="also run the teeth-signal study")
    p_bench.add_argument("--teeth-length", type=int, default=200, dest="teeth_length")
    p_bench.add_argument("--teeth-period", type=int, default=20, dest="teeth_period")
    p_bench.add_argument("--teeth-amplitude", type=float, default=1.0,
                         dest="teeth_amplitude")
    p_bench.add_argument("--teeth-sigma", type=float, default=0.3, dest="teeth_sigma")
    _add_detector_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def _add_detector_flags(p) -> None:
    p.add_argument("--threshold-c", type=float, default=1.3, dest="threshold_c",
                   help="threshold constant for binseg/wbs")
    p.add_argument("--intervals", type=int, default=5000,
                   help="random interval count for wbs")
    p.add_argument("--min-span", type=int, default=1, dest="min_span",
                   help="minimum interval span for wbs")
    p.add_argument("--min-len", type=int, default=2, dest="min_len",
                   help="minimum segment length for binseg recursion")
    p.add_argument("--m-stage", type=int, default=100, dest="m_stage",
                   help="per-stage interval draws for wbs2-sdll")
    p.add_argument("--lambda", type=float, default=1.3, dest="sdll_lambda",
                   help="steepest-drop gate constant for wbs2-sdll")
    p.add_argument("--floor-mult", type=float, default=0.3, dest="floor_mult",
                   help="drop-scan floor as a fraction of the gate")
    p.add_argument("--min-seg", type=int, default=2, dest="min_seg",
                   help="minimum segment length for bic/mbic")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
