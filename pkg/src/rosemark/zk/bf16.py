"""Bfloat16 quantization: 1 sign, 8 exponent, 7 mantissa bits.

Parameters are rounded to the nearest bfloat16 (ties to even) before
arithmetization; the shrunken mantissa keeps circuit constants small.
"""

from __future__ import annotations

import numpy as np


def quantize_bf16(x):
    """Round float32 value(s) to the nearest bfloat16, ties to even.

    Accepts scalars or arrays; returns float32 holding exactly
    bf16-representable values. Infinities pass through (saturation);
    overflowing finite values round up to infinity via exponent carry.
    """
    arr = np.asarray(x, dtype=np.float32)
    bits = arr.view(np.uint32)
    exponent_all_ones = (bits >> 23) & 0xFF == 0xFF
    lower = bits & 0xFFFF
    upper = bits >> 16
    round_up = (lower > 0x8000) | ((lower == 0x8000) & ((upper & 1) == 1))
    rounded = np.where(round_up, upper + 1, upper).astype(np.uint32) << 16
    # NaN/inf keep their payload untouched
    out_bits = np.where(exponent_all_ones, bits & 0xFFFF0000, rounded)
    out = out_bits.astype(np.uint32).view(np.float32)
    if np.isscalar(x) or np.asarray(x).shape == ():
        return np.float32(out.reshape(())[()])
    return out


def is_bf16(x) -> bool:
    """True when the value is exactly representable in bfloat16."""
    arr = np.asarray(x, dtype=np.float32)
    return bool(np.all(arr.view(np.uint32) & 0xFFFF == 0))
