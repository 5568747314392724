"""Bit-array helpers shared by the frame codecs.

Frames are manipulated as numpy uint8 arrays of 0/1 values, MSB first
within every field and every byte.
"""

from __future__ import annotations

import numpy as np

__all__ = ["int_to_bits", "bits_to_int", "bytes_to_bits", "bits_to_bytes"]


def int_to_bits(value: int, width: int) -> np.ndarray:
    """Unsigned value as `width` bits, MSB first."""
    if value < 0 or value >= (1 << width):
        raise ValueError(f"value {value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits: np.ndarray) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def bytes_to_bits(data: bytes) -> np.ndarray:
    if not data:
        return np.zeros(0, dtype=np.uint8)
    arr = np.frombuffer(data, dtype=np.uint8)
    return np.unpackbits(arr)


def bits_to_bytes(bits: np.ndarray) -> bytes:
    if len(bits) % 8:
        raise ValueError(f"bit count {len(bits)} is not a whole number of bytes")
    if len(bits) == 0:
        return b""
    return np.packbits(bits.astype(np.uint8)).tobytes()
