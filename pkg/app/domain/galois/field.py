"""Arithmetic in GF(2^8).

Elements are bytes; addition is XOR. Multiplication uses log/antilog tables
over the generator 2 for the reduction polynomial in ``settings.FIELD_POLYNOMIAL``
(default 0x11D = x^8 + x^4 + x^3 + x^2 + 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.core.config import settings
from app.core.errors import DivideByZero, FieldError

ORDER = 256
GENERATOR = 2


def _build_tables(polynomial: int) -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(2 * ORDER, dtype=np.uint8)
    log = np.zeros(ORDER, dtype=np.int32)
    value = 1
    for power in range(ORDER - 1):
        exp[power] = value
        log[value] = power
        value <<= 1
        if value & 0x100:
            value ^= polynomial
        if value == 1 and power < ORDER - 2:
            raise FieldError(f"2 is not a generator modulo {polynomial:#x}")
    exp[ORDER - 1 : 2 * (ORDER - 1)] = exp[: ORDER - 1]
    return exp, log


POLYNOMIAL = settings.FIELD_POLYNOMIAL
EXP, LOG = _build_tables(POLYNOMIAL)


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(EXP[LOG[a] + LOG[b]])


def gf_inv(a: int) -> int:
    if a == 0:
        raise DivideByZero()
    return int(EXP[(ORDER - 1) - LOG[a]])


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise DivideByZero()
    if a == 0:
        return 0
    return int(EXP[(LOG[a] - LOG[b]) % (ORDER - 1)])


def gf_pow(a: int, exponent: int) -> int:
    if a == 0:
        return 0 if exponent else 1
    return int(EXP[(LOG[a] * exponent) % (ORDER - 1)])


def scale(c: int, vector: np.ndarray) -> np.ndarray:
    """c * vector, element-wise over a uint8 array."""
    if c == 0:
        return np.zeros_like(vector, dtype=np.uint8)
    if c == 1:
        return vector.astype(np.uint8, copy=True)
    out = EXP[LOG[vector] + LOG[c]]
    out[vector == 0] = 0
    return out


def mul_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Element-wise product of two uint8 arrays of equal shape."""
    out = EXP[LOG[a] + LOG[b]]
    out[(a == 0) | (b == 0)] = 0
    return out


def combine_rows(coefficients: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """sum_j coefficients[j] * rows[j] over GF(2^8); rows has one payload per row."""
    out = np.zeros(rows.shape[1:], dtype=np.uint8)
    for c, row in zip(coefficients, rows):
        if c:
            out ^= scale(int(c), row)
    return out


@dataclass(frozen=True, slots=True)
class FieldElement:
    value: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < ORDER:
            raise FieldError(f"{self.value} is not a byte")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(gf_add(self.value, other.value))

    __sub__ = __add__

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(gf_mul(self.value, other.value))

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(gf_div(self.value, other.value))

    def __pow__(self, exponent: int) -> "FieldElement":
        return FieldElement(gf_pow(self.value, exponent))

    def inverse(self) -> "FieldElement":
        return FieldElement(gf_inv(self.value))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0
