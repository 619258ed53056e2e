"""Bit-vector helpers.

A payload is a one-dimensional ``numpy.uint8`` array holding one bit (0 or 1)
per element. Packing to bytes is big-endian within each byte and zero-extends
the tail.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

BitVector = np.ndarray

EMPTY_BITS = np.zeros(0, dtype=np.uint8)
EMPTY_BITS.setflags(write=False)


def byte_length(nbits: int) -> int:
    return (nbits + 7) // 8


def byte_aligned(nbits: int) -> int:
    return byte_length(nbits) * 8


def bits_from_bytes(data: bytes | np.ndarray, nbits: int) -> BitVector:
    """Return the first ``nbits`` bits of ``data``."""
    raw = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
    bits = np.unpackbits(raw.astype(np.uint8, copy=False))
    if bits.size < nbits:
        raise ValueError(f"need {nbits} bits, got {bits.size}")
    return bits[:nbits].copy()


def pack_bits(bits: BitVector, nbytes: int | None = None) -> np.ndarray:
    """Pack bits into bytes, zero-extending to ``nbytes`` when given."""
    packed = np.packbits(bits.astype(np.uint8, copy=False))
    if nbytes is None or packed.size == nbytes:
        return packed
    if packed.size > nbytes:
        raise ValueError(f"{bits.size} bits do not fit in {nbytes} bytes")
    out = np.zeros(nbytes, dtype=np.uint8)
    out[: packed.size] = packed
    return out


def unpack_bits(data: np.ndarray, nbits: int) -> BitVector:
    return np.unpackbits(data.astype(np.uint8, copy=False))[:nbits].copy()


def xor_bits(parts: Iterable[BitVector], length: int | None = None) -> BitVector:
    """XOR bit vectors after zero-extending them to a common length."""
    items = list(parts)
    if length is None:
        length = max((part.size for part in items), default=0)
    out = np.zeros(length, dtype=np.uint8)
    for part in items:
        out[: part.size] ^= part
    return out


def concat_bits(parts: Sequence[BitVector]) -> BitVector:
    if not parts:
        return EMPTY_BITS.copy()
    return np.concatenate(parts).astype(np.uint8, copy=False)


def bits_to_bytes(bits: BitVector) -> bytes:
    return pack_bits(bits).tobytes()


__all__ = [
    "BitVector",
    "EMPTY_BITS",
    "byte_length",
    "byte_aligned",
    "bits_from_bytes",
    "pack_bits",
    "unpack_bits",
    "xor_bits",
    "concat_bits",
    "bits_to_bytes",
]
