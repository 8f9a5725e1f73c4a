"""Compiled inner loops: sequential prediction scans and bit-level coding.

Internal module.  The scan kernels walk the grid in flat scan order keeping an
odometer of coordinates, predict each point from already-reconstructed
neighbours through a precomputed stencil bank (one flattened-offset/coefficient
run per (active-dimension mask, effective layer) pair), and quantize in
float64 regardless of the element width.  Stored reconstructions round to the
element dtype first, so compression and decompression replay bit-identical
arithmetic.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def _predict_at(source, i, coords, deltas, coeffs, starts, counts, layers):
    mask = 0
    deepest = 0x7FFFFFFFFFFFFFFF
    for axis in range(coords.shape[0]):
        if coords[axis] > 0:
            mask |= 1 << axis
            if coords[axis] < deepest:
                deepest = coords[axis]
    if mask == 0:
        return 0.0
    eff = layers if layers < deepest else deepest
    slot = (mask - 1) * layers + (eff - 1)
    begin = starts[slot]
    end = begin + counts[slot]
    acc = 0.0
    for t in range(begin, end):
        acc += coeffs[t] * source[i - deltas[t]]
    return acc


@njit(cache=True, nogil=True, inline="always")
def _advance(coords, dims):
    for axis in range(coords.shape[0]):
        coords[axis] += 1
        if coords[axis] < dims[axis]:
            return
        coords[axis] = 0


@njit(cache=True, nogil=True)
def compress_scan(
    values, recon, codes, deltas, coeffs, starts, counts, dims, layers, center, bound
):
    """Quantize every point against its prediction; returns the number of
    unpredictable points.  ``recon`` receives the reconstruction, ``codes``
    the quantization codes (0 = unpredictable)."""
    n_unpredictable = 0
    coords = np.zeros(dims.shape[0], np.int64)
    for i in range(values.shape[0]):
        predicted = _predict_at(
            recon, i, coords, deltas, coeffs, starts, counts, layers
        )
        x = np.float64(values[i])
        scaled = (x - predicted) / (2.0 * bound)
        quantized = False
        # NaN-proof: any comparison with NaN is False, forcing the verbatim path.
        if abs(scaled) < center + 1.0:
            if scaled >= 0.0:
                k = np.int64(np.floor(scaled + 0.5))
            else:
                k = np.int64(np.ceil(scaled - 0.5))
            if -(center - 1) <= k <= center - 1:
                recon[i] = predicted + k * (2.0 * bound)
                if abs(x - np.float64(recon[i])) <= bound:
                    codes[i] = center + k
                    quantized = True
        if not quantized:
            codes[i] = 0
            recon[i] = values[i]
            n_unpredictable += 1
        _advance(coords, dims)
    return n_unpredictable


@njit(cache=True, nogil=True)
def decompress_scan(
    codes, recon, unpredictable, deltas, coeffs, starts, counts, dims, layers,
    center, bound
):
    """Rebuild ``recon`` from codes; returns the number of verbatim values
    consumed, or -1 if the unpredictable block ran out early."""
    used = 0
    coords = np.zeros(dims.shape[0], np.int64)
    for i in range(codes.shape[0]):
        predicted = _predict_at(
            recon, i, coords, deltas, coeffs, starts, counts, layers
        )
        code = codes[i]
        if code == 0:
            if used >= unpredictable.shape[0]:
                return -1
            recon[i] = unpredictable[used]
            used += 1
        else:
            recon[i] = predicted + (code - center) * (2.0 * bound)
        _advance(coords, dims)
    return used


@njit(cache=True, nogil=True)
def original_hits(values, deltas, coeffs, starts, counts, dims, layers, bound):
    """Count points predicted within ``bound`` when predicting from the
    original (not reconstructed) values."""
    hits = 0
    coords = np.zeros(dims.shape[0], np.int64)
    for i in range(values.shape[0]):
        predicted = _predict_at(
            values, i, coords, deltas, coeffs, starts, counts, layers
        )
        if abs(np.float64(values[i]) - predicted) <= bound:
            hits += 1
        _advance(coords, dims)
    return hits


@njit(cache=True, nogil=True)
def pack_bits(symbols, code_words, code_lens, out):
    """Concatenate each symbol's codeword MSB-first into ``out`` (uint8),
    zero-padding the final byte.  Returns the total bit count."""
    acc = np.uint64(0)
    filled = 0
    pos = 0
    total = 0
    one = np.uint64(1)
    for i in range(symbols.shape[0]):
        word = code_words[symbols[i]]
        length = np.int64(code_lens[symbols[i]])
        total += length
        for b in range(length - 1, -1, -1):
            bit = (word >> np.uint64(b)) & one
            acc = (acc << one) | bit
            filled += 1
            if filled == 8:
                out[pos] = np.uint8(acc & np.uint64(0xFF))
                pos += 1
                acc = np.uint64(0)
                filled = 0
    if filled > 0:
        out[pos] = np.uint8((acc << np.uint64(8 - filled)) & np.uint64(0xFF))
    return total


@njit(cache=True, nogil=True)
def unpack_bits(
    data, n_bits, first_codes, level_counts, level_base, ordered_symbols, max_len, out
):
    """Canonical-code decoder: read bits MSB-first until ``out`` is full.

    Returns the symbol count on success, -1 on bit exhaustion, -2 on an
    invalid prefix (no codeword of any permitted length matches).
    """
    word = np.uint64(0)
    depth = 0
    produced = 0
    want = out.shape[0]
    one = np.uint64(1)
    for bit_pos in range(n_bits):
        if produced >= want:
            break
        byte = data[bit_pos >> 3]
        bit = np.uint64((byte >> (7 - (bit_pos & 7))) & 1)
        word = (word << one) | bit
        depth += 1
        if depth > max_len:
            return -2
        if word >= first_codes[depth]:
            offset = np.int64(word - first_codes[depth])
            if offset < level_counts[depth]:
                out[produced] = ordered_symbols[level_base[depth] + offset]
                produced += 1
                word = np.uint64(0)
                depth = 0
    if produced < want:
        return -1
    return produced
