"""Coefficient matrices over GF(2^8) and Gauss-Jordan solving."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from app.core.config import settings
from app.core.errors import RetryLimitExceeded, SingularMatrix, SizeExceedsField

from .field import ORDER, gf_inv, gf_pow, scale

logger = logging.getLogger(__name__)

MAX_COLUMNS = ORDER - 1


class MatrixKind(str, Enum):
    MDS = "mds"
    RANDOM = "random"
    IDENTITY = "identity"


@dataclass(frozen=True, slots=True, eq=False)
class CoefficientMatrix:
    entries: np.ndarray
    kind: MatrixKind
    retries: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape  # type: ignore[return-value]

    def row(self, j: int) -> np.ndarray:
        return self.entries[j]


Checker = Callable[[np.ndarray], bool]


def identity_matrix(n: int) -> CoefficientMatrix:
    return CoefficientMatrix(entries=np.eye(n, dtype=np.uint8), kind=MatrixKind.IDENTITY)


def mds_matrix(r: int, c: int) -> CoefficientMatrix:
    """r x c matrix whose every r x r column-submatrix is invertible.

    Cauchy entries 1/(x_i + y_j) with x_i = i and y_j = r + j while all r + c
    points are distinct bytes; past that, a Vandermonde matrix on the
    distinct nonzero points 2^j.
    """
    if c > MAX_COLUMNS:
        raise SizeExceedsField(f"{c} columns exceed the {MAX_COLUMNS} distinct points of GF(256)")
    if r < 1 or r > c:
        raise ValueError(f"need 1 <= r <= c, got r={r}, c={c}")

    entries = np.zeros((r, c), dtype=np.uint8)
    if r + c <= ORDER:
        for i in range(r):
            for j in range(c):
                entries[i, j] = gf_inv(i ^ (r + j))
    else:
        for i in range(r):
            for j in range(c):
                entries[i, j] = gf_pow(gf_pow(2, j), i)
    return CoefficientMatrix(entries=entries, kind=MatrixKind.MDS)


def rank(matrix: np.ndarray) -> int:
    work = matrix.astype(np.uint8, copy=True)
    rows, cols = work.shape
    pivot_row = 0
    for col in range(cols):
        candidates = np.flatnonzero(work[pivot_row:, col])
        if candidates.size == 0:
            continue
        pivot = pivot_row + int(candidates[0])
        work[[pivot_row, pivot]] = work[[pivot, pivot_row]]
        work[pivot_row] = scale(gf_inv(int(work[pivot_row, col])), work[pivot_row])
        for other in range(rows):
            if other != pivot_row and work[other, col]:
                work[other] ^= scale(int(work[other, col]), work[pivot_row])
        pivot_row += 1
        if pivot_row == rows:
            break
    return pivot_row


def is_invertible(matrix: np.ndarray) -> bool:
    rows, cols = matrix.shape
    return rows == cols and rank(matrix) == rows


def all_square_submatrices_invertible(matrix: np.ndarray) -> bool:
    """Every r x r submatrix formed from r of the c columns is invertible."""
    r, c = matrix.shape
    return all(is_invertible(matrix[:, list(cols)]) for cols in combinations(range(c), r))


def random_matrix_with_retry(
    r: int,
    c: int,
    rng: np.random.Generator,
    checker: Optional[Checker] = None,
    limit: Optional[int] = None,
) -> tuple[CoefficientMatrix, int]:
    """Uniform random r x c matrix, resampled until ``checker`` accepts it.

    Returns the matrix and the number of resamples.
    """
    check = checker or all_square_submatrices_invertible
    cap = limit if limit is not None else settings.RETRY_LIMIT
    for attempt in range(cap):
        entries = rng.integers(0, ORDER, size=(r, c), dtype=np.uint8)
        if check(entries):
            if attempt:
                logger.warning("Random %dx%d coefficient matrix accepted after %d retries", r, c, attempt)
            return CoefficientMatrix(entries=entries, kind=MatrixKind.RANDOM, retries=attempt), attempt
    raise RetryLimitExceeded(cap)


def solve_linear_system(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = b for x, where b holds one byte payload per row."""
    n = matrix.shape[0]
    if matrix.shape != (n, n) or rhs.shape[0] != n:
        raise SingularMatrix(f"expected a square system, got {matrix.shape} with {rhs.shape[0]} payloads")
    a = matrix.astype(np.uint8, copy=True)
    b = rhs.astype(np.uint8, copy=True)
    for col in range(n):
        candidates = np.flatnonzero(a[col:, col])
        if candidates.size == 0:
            raise SingularMatrix(f"coefficient matrix is singular at column {col}")
        pivot = col + int(candidates[0])
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        factor = gf_inv(int(a[col, col]))
        a[col] = scale(factor, a[col])
        b[col] = scale(factor, b[col])
        for other in range(n):
            coefficient = int(a[other, col])
            if other != col and coefficient:
                a[other] ^= scale(coefficient, a[col])
                b[other] ^= scale(coefficient, b[col])
    return b


def independent_rows(matrix: np.ndarray) -> list[int]:
    """Indices of a maximal set of linearly independent rows, greedily in order."""
    chosen: list[int] = []
    for index in range(matrix.shape[0]):
        candidate = chosen + [index]
        if rank(matrix[candidate]) == len(candidate):
            chosen = candidate
    return chosen
