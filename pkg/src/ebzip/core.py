"""Shared domain types and the serialized container format.

The container is a self-describing little-endian byte layout:

    offset  size      field
    0       4         magic ``EBZ1``
    4       1         format version (currently 1)
    5       1         element width flag (0 = 32-bit, 1 = 64-bit)
    6       1         dimensionality d
    7       1         interval exponent
    8       1         prediction layer count
    9       3         reserved, zero
    12      8*d       dimension sizes, unsigned 64-bit, low dimension first
    ...     8         effective error bound, IEEE-754 double
    ...     8         number of unpredictable values, unsigned 64-bit
    ...     8         code stream length in bits, unsigned 64-bit
    ...     2^m       code-length table, one byte per symbol (0 = unused)
    ...     ceil/8    bit-packed code stream, padded to a byte boundary
    ...     w/8 each  unpredictable values, verbatim IEEE bit patterns

All multi-byte integers and floats are little-endian.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"EBZ1"
FORMAT_VERSION = 1
MAX_NDIM = 4

_FIXED_HEADER = struct.Struct("<4sBBBBB3s")
_TAIL_HEADER = struct.Struct("<dQQ")


class ContainerError(ValueError):
    """Malformed container bytes."""


class MagicError(ContainerError):
    """Leading magic bytes do not match."""


class VersionError(ContainerError):
    """Unsupported container format version."""


class TruncatedError(ContainerError):
    """Byte sequence ends before the declared payload."""


class PayloadMismatchError(ContainerError):
    """Header counts disagree with the payload actually present."""


def _as_dims(dims) -> tuple[int, ...]:
    out = tuple(int(v) for v in dims)
    if not 1 <= len(out) <= MAX_NDIM:
        raise ValueError(f"dimensionality must be 1..{MAX_NDIM}, got {len(out)}")
    if any(v < 1 for v in out):
        raise ValueError(f"dimension sizes must be positive, got {out}")
    return out


@dataclass(frozen=True, eq=False)
class DataGrid:
    """A d-dimensional floating-point array, flattened in scan order.

    ``dims`` lists dimension sizes from the lowest (fastest-varying) to the
    highest dimension; ``values`` is the flat sequence in that scan order.
    Only finite float32/float64 data is accepted.
    """

    dims: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        dims = _as_dims(self.dims)
        values = np.asarray(self.values)
        if values.dtype not in (np.float32, np.float64):
            raise ValueError(f"values must be float32 or float64, got {values.dtype}")
        values = values.ravel()
        if values.size != math.prod(dims):
            raise ValueError(
                f"got {values.size} values for dims {dims} "
                f"(expected {math.prod(dims)})"
            )
        if not np.isfinite(values).all():
            raise ValueError("values must be finite (no NaN/Inf)")
        values = values.view()
        values.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "DataGrid":
        """Wrap a C-ordered ndarray; its last axis becomes the lowest dimension."""
        array = np.asarray(array)
        return cls(tuple(reversed(array.shape)), np.ravel(array, order="C"))

    def to_array(self) -> np.ndarray:
        """Return the values as an ndarray shaped highest dimension first."""
        return self.values.reshape(tuple(reversed(self.dims)))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_values(self) -> int:
        return self.values.size

    @property
    def element_width(self) -> int:
        """Bits per element: 32 or 64."""
        return self.values.dtype.itemsize * 8

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataGrid):
            return NotImplemented
        return (
            self.dims == other.dims
            and self.values.dtype == other.values.dtype
            and np.array_equal(self.values, other.values)
        )


def grid_range(grid: DataGrid) -> float:
    """Value range max(values) - min(values); 0 for a constant grid."""
    if grid.n_values == 0:
        raise ValueError("empty grid has no range")
    return float(np.max(grid.values) - np.min(grid.values))


@dataclass(frozen=True)
class ErrorBoundSpec:
    """Absolute and/or range-relative error bound; at least one must be set.

    ``relative`` is a dimensionless fraction of the grid's value range.  When
    both are given the effective bound is their minimum, satisfying both.
    """

    absolute: float | None = None
    relative: float | None = None

    def __post_init__(self):
        if self.absolute is None and self.relative is None:
            raise ValueError("at least one of absolute/relative must be given")
        for name in ("absolute", "relative"):
            v = getattr(self, name)
            if v is not None:
                v = float(v)
                if not math.isfinite(v) or v < 0:
                    raise ValueError(f"{name} bound must be finite and >= 0, got {v}")
                object.__setattr__(self, name, v)

    def effective_bound(self, grid: DataGrid) -> float:
        """Resolve to one positive absolute bound for this grid.

        Raises ValueError when the result would not be positive, e.g. a
        relative bound on a constant grid (zero value range).
        """
        candidates = []
        if self.absolute is not None:
            candidates.append(self.absolute)
        if self.relative is not None:
            candidates.append(self.relative * grid_range(grid))
        bound = min(candidates)
        if bound <= 0:
            raise ValueError(
                f"effective error bound must be positive, got {bound} "
                "(relative bound on a constant-range grid?)"
            )
        return bound


@dataclass(frozen=True)
class CompressorConfig:
    """Tuning knobs: prediction layers, interval count exponent, bounds, theta.

    ``interval_exponent`` m gives 2^m - 1 quantization intervals; code 0 is
    reserved for unpredictable points.  ``hitting_rate_threshold`` is the rate
    below which compression warns and suggests a larger exponent.
    """

    bound: ErrorBoundSpec
    layers: int = 1
    interval_exponent: int = 8
    hitting_rate_threshold: float = 0.9

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if not 2 <= self.interval_exponent <= 16:
            raise ValueError(
                f"interval_exponent must be in [2, 16], got {self.interval_exponent}"
            )
        theta = self.hitting_rate_threshold
        if not 0 < theta <= 1:
            raise ValueError(f"hitting_rate_threshold must be in (0, 1], got {theta}")

    @property
    def n_intervals(self) -> int:
        return (1 << self.interval_exponent) - 1


def _element_dtype(width: int) -> np.dtype:
    if width == 32:
        return np.dtype("<f4")
    if width == 64:
        return np.dtype("<f8")
    raise ValueError(f"element width must be 32 or 64, got {width}")


@dataclass(eq=False)
class CompressedStream:
    """In-memory form of one compressed grid, mirroring the container layout."""

    element_width: int
    dims: tuple[int, ...]
    layers: int
    interval_exponent: int
    eb_effective: float
    code_lengths: np.ndarray
    code_bit_length: int
    code_bits: bytes
    unpredictable_values: np.ndarray

    def __post_init__(self):
        dims = _as_dims(self.dims)
        dtype = _element_dtype(self.element_width)
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if not 2 <= self.interval_exponent <= 16:
            raise ValueError(f"interval_exponent out of range: {self.interval_exponent}")
        eb = float(self.eb_effective)
        if not math.isfinite(eb) or eb <= 0:
            raise ValueError(f"eb_effective must be finite and positive, got {eb}")
        lengths = np.ascontiguousarray(self.code_lengths, dtype=np.uint8)
        if lengths.shape != (1 << self.interval_exponent,):
            raise ValueError(
                f"code-length table must have {1 << self.interval_exponent} entries, "
                f"got {lengths.shape}"
            )
        bits = bytes(self.code_bits)
        if not 0 <= self.code_bit_length <= 8 * len(bits):
            raise ValueError("code_bit_length inconsistent with code_bits size")
        if len(bits) != (self.code_bit_length + 7) // 8:
            raise ValueError("code_bits not padded to the minimal byte boundary")
        unpred = np.ascontiguousarray(self.unpredictable_values, dtype=dtype)
        if unpred.ndim != 1:
            raise ValueError("unpredictable_values must be one-dimensional")
        if unpred.size > math.prod(dims):
            raise ValueError("more unpredictable values than grid points")
        self.dims = dims
        self.eb_effective = eb
        self.code_lengths = lengths
        self.code_bit_length = int(self.code_bit_length)
        self.code_bits = bits
        self.unpredictable_values = unpred

    @property
    def n_points(self) -> int:
        return math.prod(self.dims)

    @property
    def n_unpredictable(self) -> int:
        return self.unpredictable_values.size

    @property
    def element_dtype(self) -> np.dtype:
        return _element_dtype(self.element_width)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompressedStream):
            return NotImplemented
        return (
            self.element_width == other.element_width
            and self.dims == other.dims
            and self.layers == other.layers
            and self.interval_exponent == other.interval_exponent
            and self.eb_effective == other.eb_effective
            and np.array_equal(self.code_lengths, other.code_lengths)
            and self.code_bit_length == other.code_bit_length
            and self.code_bits == other.code_bits
            and self.unpredictable_values.tobytes()
            == other.unpredictable_values.tobytes()
        )


def serialize(stream: CompressedStream) -> bytes:
    """Encode a stream to container bytes (see module docstring for layout)."""
    width_flag = 1 if stream.element_width == 64 else 0
    parts = [
        _FIXED_HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            width_flag,
            len(stream.dims),
            stream.interval_exponent,
            stream.layers,
            b"\x00\x00\x00",
        ),
        struct.pack(f"<{len(stream.dims)}Q", *stream.dims),
        _TAIL_HEADER.pack(
            stream.eb_effective, stream.n_unpredictable, stream.code_bit_length
        ),
        stream.code_lengths.tobytes(),
        stream.code_bits,
        stream.unpredictable_values.astype(stream.element_dtype, copy=False).tobytes(),
    ]
    return b"".join(parts)


def deserialize(data: bytes) -> CompressedStream:
    """Decode container bytes back into a stream, validating the layout."""
    data = bytes(data)
    if len(data) < _FIXED_HEADER.size:
        raise TruncatedError(f"container too short for header: {len(data)} bytes")
    magic, version, width_flag, ndim, exponent, layers, reserved = (
        _FIXED_HEADER.unpack_from(data, 0)
    )
    if magic != MAGIC:
        raise MagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported container version {version}")
    if width_flag not in (0, 1):
        raise ContainerError(f"invalid element width flag {width_flag}")
    if not 1 <= ndim <= MAX_NDIM:
        raise ContainerError(f"invalid dimensionality {ndim}")
    if not 2 <= exponent <= 16:
        raise ContainerError(f"invalid interval exponent {exponent}")
    if layers < 1:
        raise ContainerError(f"invalid layer count {layers}")
    if reserved != b"\x00\x00\x00":
        raise ContainerError("reserved header bytes must be zero")

    offset = _FIXED_HEADER.size
    need = offset + 8 * ndim + _TAIL_HEADER.size
    if len(data) < need:
        raise TruncatedError("container too short for dimension table")
    dims = struct.unpack_from(f"<{ndim}Q", data, offset)
    offset += 8 * ndim
    if any(v < 1 for v in dims):
        raise ContainerError(f"invalid dimension sizes {dims}")
    eb, n_unpred, bit_length = _TAIL_HEADER.unpack_from(data, offset)
    offset += _TAIL_HEADER.size
    if not math.isfinite(eb) or eb <= 0:
        raise ContainerError(f"invalid effective error bound {eb}")
    if n_unpred > math.prod(dims):
        raise PayloadMismatchError(
            f"{n_unpred} unpredictable values exceed grid size {math.prod(dims)}"
        )

    width = 64 if width_flag else 32
    table_size = 1 << exponent
    code_bytes = (bit_length + 7) // 8
    unpred_bytes = n_unpred * (width // 8)
    total = offset + table_size + code_bytes + unpred_bytes
    if len(data) < total:
        raise TruncatedError(
            f"container holds {len(data)} bytes, header declares {total}"
        )
    if len(data) > total:
        raise PayloadMismatchError(
            f"container holds {len(data)} bytes, header declares {total}"
        )

    lengths = np.frombuffer(data, dtype=np.uint8, count=table_size, offset=offset)
    offset += table_size
    code_bits = data[offset : offset + code_bytes]
    offset += code_bytes
    unpred = np.frombuffer(
        data, dtype=_element_dtype(width), count=n_unpred, offset=offset
    )
    return CompressedStream(
        element_width=width,
        dims=dims,
        layers=layers,
        interval_exponent=exponent,
        eb_effective=eb,
        code_lengths=lengths.copy(),
        code_bit_length=bit_length,
        code_bits=code_bits,
        unpredictable_values=unpred.copy(),
    )
