from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from app.core.bits import BitVector
from app.domain.uplink.models import Segment, UserSubset


@dataclass(frozen=True, slots=True, eq=False)
class ReducedSystem:
    """Downlink blocks of one subset after user ``user`` cancelled what it knows.

    ``matrix[j, u]`` is the coefficient of ``unknowns[u]`` in row j; ``rhs``
    holds one byte payload per row.
    """

    user: int
    subset: UserSubset
    unknowns: tuple[Segment, ...]
    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def empty(self) -> bool:
        return not self.unknowns


@dataclass(frozen=True, slots=True, eq=False)
class DecodedSegment:
    segment: Segment
    bits: BitVector


@dataclass(slots=True, eq=False)
class RecoveredValues:
    """Values v_{user,n} a user obtained from the shuffle, keyed by file index."""

    user: int
    values: dict[int, BitVector] = field(default_factory=dict)

    def __getitem__(self, n: int) -> BitVector:
        return self.values[n]

    def __contains__(self, n: object) -> bool:
        return n in self.values

    def __len__(self) -> int:
        return len(self.values)

    @property
    def files(self) -> tuple[int, ...]:
        return tuple(sorted(self.values))
