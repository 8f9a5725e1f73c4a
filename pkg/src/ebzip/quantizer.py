"""Error-controlled quantization of prediction residuals.

With interval exponent m there are 2^m - 1 usable codes; code 0 marks an
unpredictable point whose value is stored verbatim elsewhere.  Code
2^(m-1) + k maps the residual to the multiple k of twice the error bound,
so every quantized point reconstructs within the bound.
"""

from __future__ import annotations

import math

UNPREDICTABLE_CODE = 0


def center_code(interval_exponent: int) -> int:
    """The code of a zero residual: 2^(m-1)."""
    return 1 << (interval_exponent - 1)


def quantize(
    real: float, predicted: float, bound: float, interval_exponent: int
) -> tuple[int, float]:
    """Quantize one value against its prediction.

    Returns ``(code, reconstructed)``.  A nonzero code reconstructs within
    ``bound`` of ``real``; ties between intervals round away from zero.  When
    the residual falls outside the code range the result is
    ``(UNPREDICTABLE_CODE, real)`` — the value is kept verbatim.
    """
    if not (math.isfinite(real) and math.isfinite(predicted)):
        raise ValueError("real and predicted values must be finite")
    if not math.isfinite(bound) or bound <= 0:
        raise ValueError(f"error bound must be finite and positive, got {bound}")
    center = center_code(interval_exponent)
    scaled = (real - predicted) / (2.0 * bound)
    if abs(scaled) < center + 1.0:
        if scaled >= 0.0:
            k = math.floor(scaled + 0.5)
        else:
            k = math.ceil(scaled - 0.5)
        if -(center - 1) <= k <= center - 1:
            reconstructed = predicted + k * (2.0 * bound)
            # Guard against rounding drift at interval edges: only emit a
            # code that really lands within the bound.
            if abs(real - reconstructed) <= bound:
                return center + k, reconstructed
    return UNPREDICTABLE_CODE, real


def dequantize(
    code: int, predicted: float, bound: float, interval_exponent: int
) -> float:
    """Invert :func:`quantize` for a nonzero code."""
    if not math.isfinite(bound) or bound <= 0:
        raise ValueError(f"error bound must be finite and positive, got {bound}")
    if code == UNPREDICTABLE_CODE:
        raise ValueError("code 0 marks an unpredictable value; nothing to dequantize")
    if not 0 < code < (1 << interval_exponent):
        raise ValueError(
            f"code {code} out of range for exponent {interval_exponent}"
        )
    return predicted + (code - center_code(interval_exponent)) * (2.0 * bound)
