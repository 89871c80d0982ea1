"""4-bit QoS buckets.

Latency bucket ``k`` covers ``(10*2**(k-1), 10*2**k]`` microseconds, with
bucket 0 holding everything up to 10 us. Loss bucket ``k`` covers
``(2**-(k+1), 2**-k]``; bucket 15 absorbs everything at or below ``2**-15``.
Both saturate at the ends. Dequantizing returns the bucket's upper bound.
"""

from __future__ import annotations

import math

LATENCY = "latency"
LOSS = "loss"

_LATENCY_BASE_US = 10


def quantize_latency(us: float) -> int:
    if us < 0:
        raise ValueError("latency must be non-negative")
    if us <= _LATENCY_BASE_US:
        return 0
    k = math.ceil(math.log2(us / _LATENCY_BASE_US))
    # guard against log2 rounding at exact powers of two
    while k > 0 and _LATENCY_BASE_US * 2 ** (k - 1) >= us:
        k -= 1
    while _LATENCY_BASE_US * 2 ** k < us:
        k += 1
    return min(k, 15)


def dequantize_latency(bucket: int) -> int:
    _check(bucket)
    return _LATENCY_BASE_US * 2 ** bucket


def quantize_loss(p: float) -> int:
    if p < 0:
        raise ValueError("loss must be non-negative")
    if p > 1:
        raise ValueError("loss probability must be <= 1")
    if p == 0:
        return 15
    k = math.floor(-math.log2(p))
    while k > 0 and 2.0 ** -k < p:
        k -= 1
    while 2.0 ** -(k + 1) >= p:
        k += 1
    return min(k, 15)


def dequantize_loss(bucket: int) -> float:
    _check(bucket)
    return 2.0 ** -bucket


def quantize_qos(value: float, kind: str) -> int:
    if kind == LATENCY:
        return quantize_latency(value)
    if kind == LOSS:
        return quantize_loss(value)
    raise ValueError(f"unknown QoS kind {kind!r}")


def dequantize_qos(bucket: int, kind: str) -> float:
    if kind == LATENCY:
        return dequantize_latency(bucket)
    if kind == LOSS:
        return dequantize_loss(bucket)
    raise ValueError(f"unknown QoS kind {kind!r}")


def _check(bucket: int):
    if not 0 <= bucket <= 15:
        raise ValueError(f"bucket {bucket} outside 0..15")
