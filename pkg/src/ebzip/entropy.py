"""Canonical prefix coding for quantization-code streams.

Code lengths come from a standard frequency-merge construction with
deterministic tie handling; the actual codewords are the canonical
assignment (codes ordered by (length, symbol)), so a table of lengths is
all a decoder needs.  Bits are packed MSB-first.
"""

from __future__ import annotations

import heapq
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernels import pack_bits, unpack_bits

MAX_CODE_LENGTH = 64


@dataclass(frozen=True, eq=False)
class CodeLengthTable:
    """Per-symbol code lengths (0 = symbol unused) plus derived code tables."""

    lengths: np.ndarray

    def __post_init__(self):
        lengths = np.ascontiguousarray(self.lengths, dtype=np.uint8)
        if lengths.ndim != 1 or lengths.size == 0:
            raise ValueError("lengths must be a non-empty one-dimensional array")
        if int(lengths.max()) > MAX_CODE_LENGTH:
            raise ValueError(f"code length exceeds {MAX_CODE_LENGTH}")
        used = lengths[lengths > 0]
        if used.size == 0:
            raise ValueError("table has no coded symbols")
        # Kraft sum <= 1 guarantees the lengths describe a real prefix code.
        kraft = sum(1 << (MAX_CODE_LENGTH - int(v)) for v in used)
        if kraft > 1 << MAX_CODE_LENGTH:
            raise ValueError("lengths violate the Kraft inequality")
        lengths = lengths.view()
        lengths.flags.writeable = False
        object.__setattr__(self, "lengths", lengths)

    @property
    def n_symbols(self) -> int:
        return self.lengths.size

    @cached_property
    def code_words(self) -> np.ndarray:
        """Canonical codewords, right-aligned in uint64."""
        lengths = self.lengths
        used = np.nonzero(lengths)[0]
        order = used[np.lexsort((used, lengths[used]))]
        words = np.zeros(lengths.size, np.uint64)
        word = 0
        prev = 0
        for s in order:
            word <<= int(lengths[s]) - prev
            words[s] = word
            word += 1
            prev = int(lengths[s])
        words.flags.writeable = False
        return words

    @cached_property
    def _decode_tables(self):
        lengths = self.lengths
        used = np.nonzero(lengths)[0]
        ordered = used[np.lexsort((used, lengths[used]))].astype(np.int32)
        level_counts = np.bincount(
            lengths[used].astype(np.int64), minlength=MAX_CODE_LENGTH + 1
        ).astype(np.int64)
        level_base = np.zeros(MAX_CODE_LENGTH + 1, np.int64)
        level_base[1:] = np.cumsum(level_counts)[:-1]
        max_len = int(lengths[used].max())
        first_codes = np.zeros(MAX_CODE_LENGTH + 1, np.uint64)
        word = 0
        for level in range(1, max_len + 1):
            word <<= 1
            first_codes[level] = word
            word += int(level_counts[level])
        return first_codes, level_counts, level_base, ordered, max_len


def build_code(histogram) -> CodeLengthTable:
    """Derive optimal code lengths from symbol counts.

    ``histogram`` is either a sequence of per-symbol counts or a mapping
    symbol -> count.  Ties during tree construction break on (count, symbol
    index), with merged subtrees ordered after the alphabet in creation
    order, so the result is fully deterministic.
    """
    if isinstance(histogram, Mapping):
        counts = np.zeros(max(histogram) + 1, np.int64)
        for symbol, count in histogram.items():
            counts[symbol] = count
    else:
        counts = np.ascontiguousarray(histogram, dtype=np.int64)
    if counts.ndim != 1 or counts.size == 0:
        raise ValueError("histogram must be non-empty and one-dimensional")
    if counts.min() < 0:
        raise ValueError("histogram counts must be >= 0")
    used = np.nonzero(counts > 0)[0]
    if used.size == 0:
        raise ValueError("histogram has no nonzero counts")

    lengths = np.zeros(counts.size, np.uint8)
    if used.size == 1:
        # A lone symbol still gets one bit so the stream length stays
        # proportional to the symbol count.
        lengths[used[0]] = 1
        return CodeLengthTable(lengths)

    parent: dict[int, int] = {}
    heap = [(int(counts[s]), int(s), int(s)) for s in used]
    heapq.heapify(heap)
    next_serial = counts.size
    while len(heap) > 1:
        count_a, _, node_a = heapq.heappop(heap)
        count_b, _, node_b = heapq.heappop(heap)
        parent[node_a] = next_serial
        parent[node_b] = next_serial
        heapq.heappush(heap, (count_a + count_b, next_serial, next_serial))
        next_serial += 1
    for s in used:
        depth = 0
        node = int(s)
        while node in parent:
            node = parent[node]
            depth += 1
        if depth > MAX_CODE_LENGTH:
            raise ValueError(f"optimal code length {depth} exceeds {MAX_CODE_LENGTH}")
        lengths[s] = depth
    return CodeLengthTable(lengths)


def encode(symbols, table: CodeLengthTable) -> tuple[bytes, int]:
    """Pack a symbol sequence into bytes; returns (bytes, exact bit length)."""
    symbols = np.ascontiguousarray(symbols, dtype=np.int32)
    if symbols.ndim != 1:
        raise ValueError("symbols must be one-dimensional")
    if symbols.size == 0:
        return b"", 0
    if int(symbols.min()) < 0 or int(symbols.max()) >= table.n_symbols:
        raise ValueError("symbol outside the table's alphabet")
    symbol_lengths = table.lengths[symbols]
    if not symbol_lengths.all():
        missing = int(symbols[np.argmin(symbol_lengths)])
        raise ValueError(f"symbol {missing} has no assigned code")
    bit_length = int(symbol_lengths.sum(dtype=np.int64))
    out = np.zeros((bit_length + 7) // 8, np.uint8)
    packed = pack_bits(symbols, table.code_words, table.lengths, out)
    if packed != bit_length:
        raise AssertionError("bit accounting mismatch")
    return out.tobytes(), bit_length


def decode(data: bytes, table: CodeLengthTable, count: int) -> np.ndarray:
    """Decode exactly ``count`` symbols from MSB-first packed ``data``.

    Trailing padding bits are ignored.  Raises ValueError when the data runs
    out early or contains a bit pattern matching no codeword.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    out = np.empty(count, np.int32)
    if count == 0:
        return out
    buf = np.frombuffer(bytes(data), np.uint8)
    first_codes, level_counts, level_base, ordered, max_len = table._decode_tables
    status = unpack_bits(
        buf, buf.size * 8, first_codes, level_counts, level_base, ordered, max_len, out
    )
    if status == -1:
        raise ValueError(
            f"bit stream exhausted after {int(buf.size) * 8} bits; "
            f"expected {count} symbols"
        )
    if status == -2:
        raise ValueError("bit stream contains an invalid code prefix")
    return out
