from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.core.bits import BitVector
from app.core.errors import MissingValue
from app.domain.system.models import IntermediateValue


@dataclass(frozen=True, slots=True, eq=False)
class MapOutput:
    """Map-phase results of every user.

    ``table[q - 1, n - 1]`` holds v_{q,n} for every file stored somewhere;
    ``user_files[k - 1]`` restricts which rows user k computed itself.
    """

    table: np.ndarray
    computed: np.ndarray
    user_files: tuple[np.ndarray, ...]
    value_bits: int

    @property
    def users(self) -> int:
        return len(self.user_files)

    def local(self, k: int) -> "LocalValues":
        return LocalValues(owner=k, output=self)

    def value_count(self, k: int) -> int:
        return self.table.shape[0] * len(self.user_files[k - 1])


@dataclass(frozen=True, slots=True, eq=False)
class LocalValues:
    """User ``owner``'s view of the map output: only its stored files."""

    owner: int
    output: MapOutput

    def has(self, n: int) -> bool:
        files = self.output.user_files[self.owner - 1]
        index = np.searchsorted(files, n)
        return bool(index < files.size and files[index] == n)

    def get(self, q: int, n: int) -> BitVector:
        if not self.has(n):
            raise MissingValue(n, self.owner)
        return self.output.table[q - 1, n - 1]

    def concat(self, q: int, files: tuple[int, ...]) -> BitVector:
        """Values v_{q,n} for ``files`` laid end to end."""
        if not files:
            return np.zeros(0, dtype=np.uint8)
        for n in files:
            if not self.has(n):
                raise MissingValue(n, self.owner)
        rows = np.asarray(files, dtype=np.int64) - 1
        return self.output.table[q - 1, rows].reshape(-1)

    def value(self, q: int, n: int) -> IntermediateValue:
        return IntermediateValue(q, n, self.get(q, n))

    def __len__(self) -> int:
        return self.output.value_count(self.owner)
