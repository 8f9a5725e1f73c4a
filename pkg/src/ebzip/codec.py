"""End-to-end compression: predict, quantize, entropy-code, package.

Compression and decompression replay the same sequential scan over the same
reconstructed values, so the pipeline is deterministic and the decompressed
grid is bit-identical to the reconstruction the compressor saw.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import entropy
from ._kernels import compress_scan, decompress_scan
from .core import CompressedStream, CompressorConfig, DataGrid
from .predictor import build_stencil
from .quantizer import UNPREDICTABLE_CODE, center_code

MAX_INTERVAL_EXPONENT = 16


@dataclass(frozen=True)
class IntervalSuggestion:
    """Raised-exponent advice attached when the hitting rate misses theta."""

    hitting_rate: float
    threshold: float
    suggested_exponent: int


@dataclass(frozen=True)
class CompressionOutcome:
    """Result of one compression: the stream plus scan statistics.

    ``recon_digest`` is a SHA-256 over the reconstruction the compressor
    produced; decompressing the stream must reproduce it exactly.
    """

    stream: CompressedStream
    hitting_rate: float
    warning: IntervalSuggestion | None
    recon_digest: str


def grid_digest(grid: DataGrid) -> str:
    """SHA-256 of the grid's raw element bytes in scan order."""
    return hashlib.sha256(grid.values.tobytes()).hexdigest()


@lru_cache(maxsize=64)
def _stencil_bank(layers: int, dims: tuple[int, ...]):
    """Flatten every boundary-reduced stencil into arrays the kernels index.

    Slot (mask, eff) covers the case where exactly the dimensions set in
    ``mask`` have nonzero coordinates and the effective layer count is
    ``eff``; it stores flat-index offsets (via the scan-order strides) and
    coefficients, ordered lexicographically by offset vector.
    """
    ndim = len(dims)
    strides = [1] * ndim
    for axis in range(1, ndim):
        strides[axis] = strides[axis - 1] * dims[axis - 1]
    deltas: list[int] = []
    coeffs: list[float] = []
    starts = np.zeros((((1 << ndim) - 1) * layers), np.int64)
    counts = np.zeros_like(starts)
    for mask in range(1, 1 << ndim):
        active = [axis for axis in range(ndim) if mask >> axis & 1]
        for eff in range(1, layers + 1):
            slot = (mask - 1) * layers + (eff - 1)
            starts[slot] = len(deltas)
            stencil = build_stencil(eff, len(active))
            for offsets, coefficient in stencil.terms:
                delta = 0
                for pos, axis in enumerate(active):
                    delta += offsets[pos] * strides[axis]
                deltas.append(delta)
                coeffs.append(float(coefficient))
            counts[slot] = len(deltas) - starts[slot]
    return (
        np.asarray(deltas, np.int64),
        np.asarray(coeffs, np.float64),
        starts,
        counts,
    )


def compress(grid: DataGrid, config: CompressorConfig) -> CompressionOutcome:
    """Compress a grid under the configured bound.

    The effective bound resolves against this grid's value range and is
    recorded in the stream, so decompression needs no side information.
    """
    bound = config.bound.effective_bound(grid)
    deltas, coeffs, starts, counts = _stencil_bank(config.layers, grid.dims)
    dims_arr = np.asarray(grid.dims, np.int64)
    recon = np.empty(grid.n_values, grid.values.dtype)
    codes = np.empty(grid.n_values, np.int32)
    n_unpredictable = compress_scan(
        grid.values, recon, codes, deltas, coeffs, starts, counts,
        dims_arr, config.layers, center_code(config.interval_exponent), bound,
    )
    histogram = np.bincount(codes, minlength=1 << config.interval_exponent)
    table = entropy.build_code(histogram)
    code_bits, bit_length = entropy.encode(codes, table)
    stream = CompressedStream(
        element_width=grid.element_width,
        dims=grid.dims,
        layers=config.layers,
        interval_exponent=config.interval_exponent,
        eb_effective=bound,
        code_lengths=table.lengths,
        code_bit_length=bit_length,
        code_bits=code_bits,
        unpredictable_values=grid.values[codes == UNPREDICTABLE_CODE],
    )
    hitting_rate = (grid.n_values - n_unpredictable) / grid.n_values
    warning = None
    if hitting_rate < config.hitting_rate_threshold:
        warning = IntervalSuggestion(
            hitting_rate=hitting_rate,
            threshold=config.hitting_rate_threshold,
            suggested_exponent=min(
                config.interval_exponent + 2, MAX_INTERVAL_EXPONENT
            ),
        )
    return CompressionOutcome(
        stream=stream,
        hitting_rate=hitting_rate,
        warning=warning,
        recon_digest=hashlib.sha256(recon.tobytes()).hexdigest(),
    )


def decompress(stream: CompressedStream) -> DataGrid:
    """Rebuild the reconstructed grid from a stream."""
    n_points = stream.n_points
    table = entropy.CodeLengthTable(stream.code_lengths)
    codes = entropy.decode(stream.code_bits, table, n_points)
    n_zero = int(np.count_nonzero(codes == UNPREDICTABLE_CODE))
    if n_zero != stream.n_unpredictable:
        raise ValueError(
            f"stream carries {stream.n_unpredictable} unpredictable values "
            f"but codes mark {n_zero}"
        )
    deltas, coeffs, starts, counts = _stencil_bank(stream.layers, stream.dims)
    dims_arr = np.asarray(stream.dims, np.int64)
    recon = np.empty(n_points, stream.element_dtype)
    used = decompress_scan(
        codes, recon, stream.unpredictable_values, deltas, coeffs, starts, counts,
        dims_arr, stream.layers, center_code(stream.interval_exponent),
        stream.eb_effective,
    )
    if used != stream.n_unpredictable:
        raise ValueError("unpredictable block not fully consumed")
    return DataGrid(stream.dims, recon)
