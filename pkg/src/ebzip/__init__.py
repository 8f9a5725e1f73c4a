"""Error-bounded lossy compression for multidimensional float grids."""

from .codec import CompressionOutcome, IntervalSuggestion, compress, decompress
from .core import (
    CompressedStream,
    CompressorConfig,
    ContainerError,
    DataGrid,
    ErrorBoundSpec,
    MagicError,
    PayloadMismatchError,
    TruncatedError,
    VersionError,
    deserialize,
    grid_range,
    serialize,
)
from .metrics import MetricsReport, compute_metrics

__version__ = "0.1.0"

__all__ = [
    "CompressedStream",
    "CompressionOutcome",
    "CompressorConfig",
    "ContainerError",
    "DataGrid",
    "ErrorBoundSpec",
    "IntervalSuggestion",
    "MagicError",
    "MetricsReport",
    "PayloadMismatchError",
    "TruncatedError",
    "VersionError",
    "compress",
    "compute_metrics",
    "decompress",
    "deserialize",
    "grid_range",
    "serialize",
    "__version__",
]
