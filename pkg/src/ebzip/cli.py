"""Command-line front end: compress, decompress, analyze, generate.

Raw input/output files are headerless little-endian IEEE floats in scan
order (lowest dimension varying fastest), so grid shape and element width
travel on the command line; compressed ``.ebz`` files are self-describing.
Multiple files are processed concurrently file-by-file — results never
depend on the worker count.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, codec, metrics
from .core import (
    CompressorConfig,
    ContainerError,
    DataGrid,
    ErrorBoundSpec,
    deserialize,
    serialize,
)

COMPRESSED_SUFFIX = ".ebz"
DECOMPRESSED_SUFFIX = ".dec"
WORKERS_ENV = "EBZIP_WORKERS"
MAX_EXPONENT = 16

_COMPRESS_COLUMNS = (
    "file,values,layers,exponent,bound,factor,bit_rate,hitting_rate,"
    "seconds,mb_per_s,output,note"
)
_DECOMPRESS_COLUMNS = "file,values,seconds,output"


def _dims_arg(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}")
    if not dims or any(v < 1 for v in dims):
        raise argparse.ArgumentTypeError(f"dimensions must be positive: {text!r}")
    return dims


def _float_list_arg(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


def _int_list_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def _raw_dtype(width: int) -> np.dtype:
    return np.dtype("<f4" if width == 32 else "<f8")


def _load_raw(path: Path, dims: tuple[int, ...], width: int) -> DataGrid:
    data = np.fromfile(path, dtype=_raw_dtype(width))
    expected = int(np.prod(dims))
    if data.size != expected:
        raise ValueError(
            f"{path}: holds {data.size} values, dims {dims} need {expected}"
        )
    return DataGrid(dims, data)


def _bound_from_args(args) -> ErrorBoundSpec:
    if args.abs_bound is None and args.rel_bound is None:
        args.parser.error("one of --abs-bound/--rel-bound is required")
    return ErrorBoundSpec(absolute=args.abs_bound, relative=args.rel_bound)


def _worker_count(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _map_files(paths, job, workers):
    """Run ``job`` over paths, keeping input order; returns (path, ok, payload)."""
    def guarded(path):
        try:
            return True, job(path)
        except (OSError, ValueError, ContainerError) as exc:
            return False, str(exc)

    if workers <= 1 or len(paths) <= 1:
        outcomes = [guarded(p) for p in paths]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(guarded, paths))
    return [(path, ok, payload) for path, (ok, payload) in zip(paths, outcomes)]


def _out_path(path: Path, out_dir, suffix_change) -> Path:
    target = suffix_change(path.name)
    directory = Path(out_dir) if out_dir else path.parent
    directory.mkdir(parents=True, exist_ok=True)
    return directory / target


def _emit(rows, header, csv_path):
    print(header)
    for row in rows:
        print(row)
    if csv_path:
        Path(csv_path).write_text(header + "\n" + "".join(r + "\n" for r in rows))


def _cmd_compress(args) -> int:
    bound = _bound_from_args(args)
    config = CompressorConfig(
        bound=bound,
        layers=args.layers,
        interval_exponent=args.intervals_exp,
        hitting_rate_threshold=args.theta,
    )

    def job(path: Path):
        grid = _load_raw(path, args.dims, args.width)
        start = time.perf_counter()
        current = config
        outcome = codec.compress(grid, current)
        note = ""
        if args.auto_m:
            while outcome.warning and current.interval_exponent < MAX_EXPONENT:
                current = replace(
                    current,
                    interval_exponent=outcome.warning.suggested_exponent,
                )
                outcome = codec.compress(grid, current)
            if current.interval_exponent != config.interval_exponent:
                note = f"raised exponent to {current.interval_exponent}"
        if outcome.warning:
            w = outcome.warning
            note = (
                f"hitting rate {w.hitting_rate:.3f} < {w.threshold:.3f}; "
                f"consider exponent {w.suggested_exponent}"
            )
        payload = serialize(outcome.stream)
        elapsed = time.perf_counter() - start
        target = _out_path(path, args.out, lambda name: name + COMPRESSED_SUFFIX)
        target.write_bytes(payload)
        raw_bytes = grid.n_values * grid.element_width // 8
        return ",".join(
            (
                str(path),
                str(grid.n_values),
                str(current.layers),
                str(current.interval_exponent),
                format(outcome.stream.eb_effective, ".6g"),
                format(metrics.compression_factor(raw_bytes, len(payload)), ".6g"),
                format(metrics.bit_rate(len(payload), grid.n_values), ".6g"),
                format(outcome.hitting_rate, ".6g"),
                format(elapsed, ".6g"),
                format(raw_bytes / 1e6 / elapsed if elapsed > 0 else 0.0, ".6g"),
                str(target),
                note,
            )
        )

    results = _map_files([Path(p) for p in args.files], job, _worker_count(args))
    rows = [payload for _, ok, payload in results if ok]
    _emit(rows, _COMPRESS_COLUMNS, args.csv)
    failed = [(path, payload) for path, ok, payload in results if not ok]
    for path, message in failed:
        print(f"error: {path}: {message}", file=sys.stderr)
    return 1 if failed else 0


def _cmd_decompress(args) -> int:
    def job(path: Path):
        start = time.perf_counter()
        grid = codec.decompress(deserialize(path.read_bytes()))
        name = path.name
        if name.endswith(COMPRESSED_SUFFIX):
            name = name[: -len(COMPRESSED_SUFFIX)]
        target = _out_path(path, args.out, lambda _: name + DECOMPRESSED_SUFFIX)
        grid.values.astype(_raw_dtype(grid.element_width), copy=False).tofile(target)
        elapsed = time.perf_counter() - start
        return ",".join(
            (str(path), str(grid.n_values), format(elapsed, ".6g"), str(target))
        )

    results = _map_files([Path(p) for p in args.files], job, _worker_count(args))
    rows = [payload for _, ok, payload in results if ok]
    _emit(rows, _DECOMPRESS_COLUMNS, args.csv)
    failed = [(path, payload) for path, ok, payload in results if not ok]
    for path, message in failed:
        print(f"error: {path}: {message}", file=sys.stderr)
    return 1 if failed else 0


def _analysis_grid(args) -> DataGrid:
    if (args.input is None) == (args.generator is None):
        args.parser.error("provide exactly one of --input or --generator")
    if args.input is not None:
        return _load_raw(Path(args.input), args.dims, args.width)
    return analysis.generate(args.generator, args.dims, seed=args.seed, width=args.width)


def _cmd_analyze(args) -> int:
    try:
        grid = _analysis_grid(args)
        if args.mode == "metrics":
            if args.reconstructed is None:
                args.parser.error("metrics mode needs --reconstructed")
            other = _load_raw(Path(args.reconstructed), args.dims, args.width)
            report = metrics.compute_metrics(
                grid, other, compressed_bytes=args.compressed_size
            )
            text = metrics.METRICS_CSV_HEADER + "\n" + metrics.metrics_csv_row(report) + "\n"
        else:
            if args.mode != "best-layer" and args.bounds is None:
                args.parser.error(f"{args.mode} mode needs --bounds")
            # sweep modes replace the bound per point, so --bounds alone is
            # enough there; best-layer genuinely uses the base bound
            if args.abs_bound is None and args.rel_bound is None and args.bounds:
                bound = ErrorBoundSpec(relative=args.bounds[0])
            else:
                bound = _bound_from_args(args)
            config = CompressorConfig(
                bound=bound,
                layers=args.layers,
                interval_exponent=args.intervals_exp,
                hitting_rate_threshold=args.theta,
            )
            if args.mode == "best-layer":
                report = analysis.best_layer_scan(grid, config, args.layer_set)
                text = analysis.layer_scan_csv(report)
            elif args.mode == "interval-sweep":
                report = analysis.interval_sweep(
                    grid, config, args.bounds, args.exponents
                )
                text = analysis.interval_sweep_csv(report)
            else:
                report = analysis.rate_distortion_sweep(grid, config, args.bounds)
                text = analysis.rate_distortion_csv(report)
    except (OSError, ValueError, ContainerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(text, end="")
    if args.csv:
        Path(args.csv).write_text(text)
    return 0


def _cmd_generate(args) -> int:
    try:
        grid = analysis.generate(
            args.name, args.dims, seed=args.seed, width=args.width
        )
        target = Path(args.out)
        if target.parent and not target.parent.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
        grid.values.astype(_raw_dtype(grid.element_width), copy=False).tofile(target)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{target},{grid.n_values},{grid.element_width}")
    return 0


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--layers", type=int, default=1,
                        help="prediction layer count (default 1)")
    parser.add_argument("--intervals-exp", type=int, default=8,
                        help="interval exponent m: 2^m - 1 intervals (default 8)")
    parser.add_argument("--abs-bound", type=float, default=None,
                        help="absolute error bound")
    parser.add_argument("--rel-bound", type=float, default=None,
                        help="value-range-relative error bound")
    parser.add_argument("--theta", type=float, default=0.9,
                        help="hitting-rate warning threshold (default 0.9)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ebzip",
        description="Error-bounded lossy compressor for gridded floating-point data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress raw float grids")
    p.add_argument("files", nargs="+", help="raw input files")
    p.add_argument("--dims", type=_dims_arg, required=True,
                   help="comma-separated sizes, fastest-varying dimension first")
    p.add_argument("--width", type=int, choices=(32, 64), default=32,
                   help="element width in bits (default 32)")
    _add_config_flags(p)
    p.add_argument("--auto-m", action="store_true",
                   help="raise the exponent by 2 (up to 16) while below theta")
    p.add_argument("--workers", type=int, default=None,
                   help=f"concurrent files (default ${WORKERS_ENV} or 1)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--csv", default=None, help="also write the summary CSV here")
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("decompress", help="decompress .ebz files to raw floats")
    p.add_argument("files", nargs="+", help="compressed input files")
    p.add_argument("--workers", type=int, default=None,
                   help=f"concurrent files (default ${WORKERS_ENV} or 1)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--csv", default=None, help="also write the summary CSV here")
    p.set_defaults(func=_cmd_decompress)

    p = sub.add_parser("analyze", help="metrics and parameter studies")
    p.add_argument("mode",
                   choices=("metrics", "best-layer", "interval-sweep", "rate-distortion"))
    p.add_argument("--input", default=None, help="raw grid to analyze")
    p.add_argument("--generator", choices=analysis.GENERATOR_NAMES, default=None,
                   help="synthesize the grid instead of reading --input")
    p.add_argument("--dims", type=_dims_arg, required=True,
                   help="comma-separated sizes, fastest-varying dimension first")
    p.add_argument("--width", type=int, choices=(32, 64), default=32)
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    _add_config_flags(p)
    p.add_argument("--reconstructed", default=None,
                   help="metrics mode: reconstructed raw grid")
    p.add_argument("--compressed-size", type=int, default=None,
                   help="metrics mode: compressed byte size for factor/bit rate")
    p.add_argument("--layer-set", type=_int_list_arg, default=(1, 2, 3, 4),
                   help="best-layer mode: candidate layer counts")
    p.add_argument("--bounds", type=_float_list_arg, default=None,
                   help="sweep modes: comma-separated relative bounds")
    p.add_argument("--exponents", type=_int_list_arg, default=(4, 8, 12),
                   help="interval-sweep mode: exponents to try")
    p.add_argument("--csv", default=None, help="also write the report here")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("generate", help="write a synthetic raw grid")
    p.add_argument("name", choices=analysis.GENERATOR_NAMES)
    p.add_argument("--dims", type=_dims_arg, required=True)
    p.add_argument("--width", type=int, choices=(32, 64), default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output file")
    p.set_defaults(func=_cmd_generate)

    for sp in sub.choices.values():
        sp.set_defaults(parser=sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
