"""Distortion and size metrics for original/reconstructed grid pairs.

Range-normalized quantities (relative error, NRMSE, PSNR) divide by the
original grid's value range; on a constant grid they degenerate to nan/inf
sentinels rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DataGrid, grid_range

DEFAULT_AUTOCORR_LAGS = 100

METRICS_CSV_HEADER = (
    "max_abs_error,max_rel_error,rmse,nrmse,psnr,pearson_rho,"
    "compression_factor,bit_rate"
)


@dataclass(frozen=True)
class MetricsReport:
    max_abs_error: float
    max_rel_error: float
    rmse: float
    nrmse: float
    psnr: float
    pearson_rho: float
    compression_factor: float
    bit_rate: float
    autocorr: np.ndarray


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        if numerator == 0.0:
            return math.nan
        return math.inf
    return numerator / denominator


def compression_factor(original_bytes: int, compressed_bytes: int) -> float:
    """Original size over compressed size."""
    if original_bytes <= 0 or compressed_bytes <= 0:
        raise ValueError("sizes must be positive")
    return original_bytes / compressed_bytes


def bit_rate(compressed_bytes: int, n_values: int) -> float:
    """Compressed bits spent per grid value."""
    if compressed_bytes <= 0 or n_values <= 0:
        raise ValueError("sizes must be positive")
    return 8.0 * compressed_bytes / n_values


def autocorrelation(series: np.ndarray, lags: int = DEFAULT_AUTOCORR_LAGS) -> np.ndarray:
    """Normalized autocorrelation of ``series`` at lags 0..lags.

    Lag 0 is 1 by construction; lags reaching past the series length, or any
    lag of a constant series, come out nan.
    """
    series = np.asarray(series, np.float64).ravel()
    if series.size == 0:
        raise ValueError("series must be non-empty")
    if lags < 0:
        raise ValueError(f"lags must be >= 0, got {lags}")
    centered = series - series.mean()
    denom = float(np.dot(centered, centered))
    out = np.full(lags + 1, math.nan)
    if denom == 0.0:
        return out
    out[0] = 1.0
    for lag in range(1, lags + 1):
        if lag >= centered.size:
            break
        out[lag] = float(np.dot(centered[:-lag], centered[lag:])) / denom
    return out


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if denom == 0.0:
        return math.nan
    return min(1.0, max(-1.0, float(np.dot(da, db)) / denom))


def compute_metrics(
    original: DataGrid,
    reconstructed: DataGrid,
    compressed_bytes: int | None = None,
    lags: int = DEFAULT_AUTOCORR_LAGS,
) -> MetricsReport:
    """Compare a reconstruction against its original.

    When ``compressed_bytes`` is known the size metrics are filled in;
    otherwise they are nan.  All accumulation happens in float64.
    """
    if original.dims != reconstructed.dims:
        raise ValueError(
            f"grid shapes differ: {original.dims} vs {reconstructed.dims}"
        )
    a = original.values.astype(np.float64, copy=False)
    b = reconstructed.values.astype(np.float64, copy=False)
    error = a - b
    value_range = grid_range(original)
    max_abs = float(np.max(np.abs(error)))
    rmse = math.sqrt(float(np.dot(error, error)) / error.size)
    if rmse == 0.0:
        psnr = math.inf
    elif value_range == 0.0:
        psnr = -math.inf
    else:
        psnr = 20.0 * math.log10(value_range / rmse)
    if compressed_bytes is None:
        factor = math.nan
        rate = math.nan
    else:
        original_bytes = original.n_values * original.element_width // 8
        factor = compression_factor(original_bytes, compressed_bytes)
        rate = bit_rate(compressed_bytes, original.n_values)
    return MetricsReport(
        max_abs_error=max_abs,
        max_rel_error=_ratio(max_abs, value_range),
        rmse=rmse,
        nrmse=_ratio(rmse, value_range),
        psnr=psnr,
        pearson_rho=_pearson(a, b),
        compression_factor=factor,
        bit_rate=rate,
        autocorr=autocorrelation(error, lags),
    )


def metrics_csv_row(report: MetricsReport) -> str:
    """One CSV row matching METRICS_CSV_HEADER (autocorrelation excluded)."""
    fields = (
        report.max_abs_error,
        report.max_rel_error,
        report.rmse,
        report.nrmse,
        report.psnr,
        report.pearson_rho,
        report.compression_factor,
        report.bit_rate,
    )
    return ",".join(format(v, ".17g") for v in fields)
