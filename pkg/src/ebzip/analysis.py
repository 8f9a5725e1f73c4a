"""Experiment drivers: synthetic grids, layer selection, parameter sweeps.

Hitting rates come in two flavours.  The *original* rate counts points whose
prediction from the original neighbours lands within the bound — a property
of the data alone.  The *decompressed* rate is the codec's own hitting rate:
the fraction of points the quantizer captured while predicting from
reconstructed values, which is what compression actually achieves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from ._kernels import original_hits
from .codec import _stencil_bank, compress, decompress
from .core import CompressorConfig, DataGrid, ErrorBoundSpec, serialize
from .metrics import compute_metrics

GENERATOR_NAMES = ("constant", "sines", "poly", "noise", "spiky")

_TWO_PI = 2.0 * math.pi


def _axis_coordinates(dims: tuple[int, ...]) -> list[np.ndarray]:
    """Flat normalized coordinates (index/size per axis) in scan order."""
    index = np.arange(math.prod(dims), dtype=np.int64)
    coords = []
    stride = 1
    for size in dims:
        coords.append(((index // stride) % size) / float(size))
        stride *= size
    return coords


def _sines_field(coords: list[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    field = np.zeros(coords[0].size)
    for term in range(4):
        freqs = rng.integers(1, 5, size=len(coords))
        phase = rng.uniform(0.0, _TWO_PI)
        arg = np.full(coords[0].size, phase)
        for axis, x in enumerate(coords):
            arg += _TWO_PI * freqs[axis] * x
        field += np.sin(arg) / (term + 1.0)
    return field


def generate(name: str, dims, seed: int = 0, width: int = 64) -> DataGrid:
    """Build a deterministic synthetic grid.

    ``constant`` is all ones; ``sines`` sums four low-frequency sinusoids;
    ``poly`` is a random polynomial of total degree <= 3 in normalized
    coordinates; ``noise`` is i.i.d. standard normal; ``spiky`` overlays
    sparse large impulses on the sines background.  The same (name, dims,
    seed, width) always yields the same grid.
    """
    dims = tuple(int(v) for v in dims)
    if width not in (32, 64):
        raise ValueError(f"width must be 32 or 64, got {width}")
    rng = np.random.default_rng(seed)
    n = math.prod(dims)
    if name == "constant":
        field = np.ones(n)
    elif name == "sines":
        field = _sines_field(_axis_coordinates(dims), rng)
    elif name == "poly":
        coords = _axis_coordinates(dims)
        field = np.zeros(n)
        for powers in product(range(4), repeat=len(dims)):
            if sum(powers) > 3:
                continue
            term = np.full(n, rng.uniform(-1.0, 1.0))
            for axis, power in enumerate(powers):
                if power:
                    term *= coords[axis] ** power
            field += term
    elif name == "noise":
        field = rng.standard_normal(n)
    elif name == "spiky":
        field = _sines_field(_axis_coordinates(dims), rng)
        n_spikes = max(1, n // 100)
        where = rng.choice(n, size=n_spikes, replace=False)
        field[where] += rng.uniform(3.0, 8.0, n_spikes) * rng.choice(
            (-1.0, 1.0), n_spikes
        )
    else:
        raise ValueError(f"unknown generator {name!r}; choose from {GENERATOR_NAMES}")
    if width == 32:
        field = field.astype(np.float32)
    return DataGrid(dims, field)


@dataclass(frozen=True)
class LayerScanRow:
    layers: int
    hit_rate_original: float
    hit_rate_decompressed: float


@dataclass(frozen=True)
class LayerScanReport:
    rows: tuple[LayerScanRow, ...]
    recommended_layers: int


def best_layer_scan(
    grid: DataGrid, config: CompressorConfig, candidates=(1, 2, 3, 4)
) -> LayerScanReport:
    """Measure both hitting rates for each candidate layer count.

    The recommendation is the candidate with the highest decompressed rate —
    the rate that governs real compression — with ties going to the smaller
    (cheaper) layer count.
    """
    candidates = sorted({int(c) for c in candidates})
    if not candidates or candidates[0] < 1:
        raise ValueError(f"layer candidates must be >= 1, got {candidates}")
    bound = config.bound.effective_bound(grid)
    dims_arr = np.asarray(grid.dims, np.int64)
    rows = []
    for layers in candidates:
        deltas, coeffs, starts, counts = _stencil_bank(layers, grid.dims)
        hits = original_hits(
            grid.values, deltas, coeffs, starts, counts, dims_arr, layers, bound
        )
        outcome = compress(grid, replace(config, layers=layers))
        rows.append(
            LayerScanRow(
                layers=layers,
                hit_rate_original=hits / grid.n_values,
                hit_rate_decompressed=outcome.hitting_rate,
            )
        )
    best = rows[0]
    for row in rows[1:]:
        if row.hit_rate_decompressed > best.hit_rate_decompressed:
            best = row
    return LayerScanReport(rows=tuple(rows), recommended_layers=best.layers)


@dataclass(frozen=True)
class SweepCell:
    relative_bound: float
    interval_exponent: int
    hitting_rate: float
    meets_threshold: bool


@dataclass(frozen=True)
class IntervalSweepReport:
    threshold: float
    cells: tuple[SweepCell, ...]
    # (relative bound, smallest adequate exponent or None) per bound
    selections: tuple[tuple[float, int | None], ...]


def interval_sweep(
    grid: DataGrid, config: CompressorConfig, bounds, exponents
) -> IntervalSweepReport:
    """Grid-search hitting rate over relative bounds x interval exponents.

    For each bound the selection is the smallest exponent whose hitting rate
    reaches the configured threshold, or None when none does.
    """
    bounds = [float(b) for b in bounds]
    exponents = sorted({int(e) for e in exponents})
    if not bounds or not exponents:
        raise ValueError("bounds and exponents must be non-empty")
    cells = []
    selections = []
    for rel in bounds:
        chosen = None
        for exponent in exponents:
            outcome = compress(
                grid,
                replace(
                    config,
                    bound=ErrorBoundSpec(relative=rel),
                    interval_exponent=exponent,
                ),
            )
            ok = outcome.hitting_rate >= config.hitting_rate_threshold
            cells.append(
                SweepCell(
                    relative_bound=rel,
                    interval_exponent=exponent,
                    hitting_rate=outcome.hitting_rate,
                    meets_threshold=ok,
                )
            )
            if ok and chosen is None:
                chosen = exponent
        selections.append((rel, chosen))
    return IntervalSweepReport(
        threshold=config.hitting_rate_threshold,
        cells=tuple(cells),
        selections=tuple(selections),
    )


@dataclass(frozen=True)
class RatePoint:
    relative_bound: float
    bit_rate: float
    psnr: float
    compression_factor: float
    hitting_rate: float


@dataclass(frozen=True)
class RateDistortionReport:
    points: tuple[RatePoint, ...]


def rate_distortion_sweep(
    grid: DataGrid, config: CompressorConfig, bounds
) -> RateDistortionReport:
    """Compress at each relative bound and measure rate/distortion.

    Points come back sorted by bit rate ascending (loosest bound first on
    well-behaved data).
    """
    bounds = [float(b) for b in bounds]
    if not bounds:
        raise ValueError("bounds must be non-empty")
    points = []
    for rel in bounds:
        outcome = compress(
            grid, replace(config, bound=ErrorBoundSpec(relative=rel))
        )
        compressed = serialize(outcome.stream)
        report = compute_metrics(
            grid, decompress(outcome.stream), compressed_bytes=len(compressed)
        )
        points.append(
            RatePoint(
                relative_bound=rel,
                bit_rate=report.bit_rate,
                psnr=report.psnr,
                compression_factor=report.compression_factor,
                hitting_rate=outcome.hitting_rate,
            )
        )
    points.sort(key=lambda p: p.bit_rate)
    return RateDistortionReport(points=tuple(points))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def layer_scan_csv(report: LayerScanReport) -> str:
    lines = ["layers,hit_rate_original,hit_rate_decompressed,recommended"]
    for row in report.rows:
        lines.append(
            ",".join(
                (
                    _fmt(row.layers),
                    _fmt(row.hit_rate_original),
                    _fmt(row.hit_rate_decompressed),
                    _fmt(row.layers == report.recommended_layers),
                )
            )
        )
    return "\n".join(lines) + "\n"


def interval_sweep_csv(report: IntervalSweepReport) -> str:
    selected = {pair for pair in report.selections if pair[1] is not None}
    lines = ["relative_bound,interval_exponent,hitting_rate,meets_threshold,selected"]
    for cell in report.cells:
        lines.append(
            ",".join(
                (
                    _fmt(cell.relative_bound),
                    _fmt(cell.interval_exponent),
                    _fmt(cell.hitting_rate),
                    _fmt(cell.meets_threshold),
                    _fmt((cell.relative_bound, cell.interval_exponent) in selected),
                )
            )
        )
    return "\n".join(lines) + "\n"


def rate_distortion_csv(report: RateDistortionReport) -> str:
    lines = ["relative_bound,bit_rate,psnr,compression_factor,hitting_rate"]
    for point in report.points:
        lines.append(
            ",".join(
                (
                    _fmt(point.relative_bound),
                    _fmt(point.bit_rate),
                    _fmt(point.psnr),
                    _fmt(point.compression_factor),
                    _fmt(point.hitting_rate),
                )
            )
        )
    return "\n".join(lines) + "\n"
