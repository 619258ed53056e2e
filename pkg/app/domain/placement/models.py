from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from app.domain.system.schemas import SharingPartition


class PlacementKind(str, Enum):
    """Origin of a placement."""

    CENTRALIZED = "centralized"
    MEMORY_SHARING = "memory_sharing"
    DECENTRALIZED = "decentralized"
    CUSTOM = "custom"


@dataclass(frozen=True, slots=True, eq=False)
class Placement:
    """Stored-file index sets U_1..U_K (sorted, 1-based file labels)."""

    kind: PlacementKind
    file_count: int
    user_files: tuple[np.ndarray, ...]
    batches: Mapping[tuple[int, ...], tuple[int, ...]] = field(default_factory=dict)
    sharing: Optional[SharingPartition] = None
    metadata: Mapping[str, Any] = field(default_factory=dict)

    @property
    def users(self) -> int:
        return len(self.user_files)

    @property
    def all_users(self) -> tuple[int, ...]:
        return tuple(range(1, self.users + 1))

    def files_of(self, k: int) -> np.ndarray:
        return self.user_files[k - 1]

    def incidence(self, participants: Optional[Sequence[int]] = None) -> np.ndarray:
        """Boolean matrix: row per participant, column per file."""
        members = tuple(participants) if participants is not None else self.all_users
        matrix = np.zeros((len(members), self.file_count), dtype=bool)
        for row, k in enumerate(members):
            matrix[row, self.files_of(k) - 1] = True
        return matrix

    def available_files(self, participants: Optional[Sequence[int]] = None) -> tuple[int, ...]:
        stored = self.incidence(participants).any(axis=0)
        return tuple(int(n) + 1 for n in np.flatnonzero(stored))

    def same_sets(self, other: "Placement") -> bool:
        return self.file_count == other.file_count and self.users == other.users and all(
            np.array_equal(a, b) for a, b in zip(self.user_files, other.user_files)
        )


@dataclass(frozen=True, slots=True)
class ReplicationHistogram:
    """counts[j] = number of files stored by exactly j participants (j = 0..K)."""

    counts: tuple[int, ...]

    @property
    def users(self) -> int:
        return len(self.counts) - 1

    @property
    def file_count(self) -> int:
        return sum(self.counts)

    @property
    def unstored(self) -> int:
        return self.counts[0]

    @property
    def stored_copies(self) -> int:
        return sum(j * a for j, a in enumerate(self.counts))

    def fractions(self) -> tuple[Fraction, ...]:
        total = self.file_count
        return tuple(Fraction(a, total) for a in self.counts)

    def __getitem__(self, j: int) -> int:
        return self.counts[j]
