from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from app.core.bits import BitVector

UserSubset = tuple[int, ...]


@dataclass(frozen=True, slots=True, eq=False)
class ExclusiveSet:
    """Values needed by ``target`` and stored by exactly the users in ``owners``.

    ``payload`` is the concatenation of v_{target,n} over ``files`` in file
    order; it is ``None`` in plans derived from placement alone.
    """

    target: int
    owners: UserSubset
    files: tuple[int, ...]
    value_bits: int
    payload: Optional[BitVector] = None

    @property
    def subset(self) -> UserSubset:
        return tuple(sorted((*self.owners, self.target)))

    @property
    def payload_bits(self) -> int:
        return len(self.files) * self.value_bits

    @property
    def key(self) -> tuple[int, UserSubset]:
        return self.target, self.owners


@dataclass(frozen=True, slots=True, eq=False)
class Segment:
    """Chunk ``[start, start + payload_bits)`` of an exclusive set, sent by ``sender``.

    ``padded_bits`` is the common ceiling length of all chunks of the set;
    the trailing ``padded_bits - payload_bits`` bits are zeros.
    """

    target: int
    owners: UserSubset
    sender: int
    start: int
    payload_bits: int
    padded_bits: int
    payload: Optional[BitVector] = None

    @property
    def padding_bits(self) -> int:
        return self.padded_bits - self.payload_bits

    @property
    def key(self) -> tuple[int, UserSubset]:
        return self.target, self.owners


@dataclass(frozen=True, slots=True, eq=False)
class MessagePlan:
    """Layout of one uplink message: which segments are XORed together."""

    sender: int
    subset: UserSubset
    constituents: tuple[Segment, ...]

    @property
    def bit_length(self) -> int:
        return max((segment.padded_bits for segment in self.constituents), default=0)

    @property
    def useful_bits(self) -> int:
        return max((segment.payload_bits for segment in self.constituents), default=0)


@dataclass(frozen=True, slots=True, eq=False)
class UplinkMessage:
    """One uplink transmission as it goes on the air: sender, subset, payload.

    The segments that were XORed into ``payload`` stay with the encoder's
    ``MessagePlan``; nothing downstream of the uplink can reach map values.
    """

    sender: int
    subset: UserSubset
    payload: BitVector

    @property
    def bit_length(self) -> int:
        return int(self.payload.size)


@dataclass(frozen=True, slots=True, eq=False)
class UplinkPlan:
    """Everything about the uplink derivable from placement and value size."""

    exclusive_sets: tuple[ExclusiveSet, ...]
    messages: tuple[MessagePlan, ...]
    coded: bool

    def sets_by_key(self) -> dict[tuple[int, UserSubset], ExclusiveSet]:
        return {es.key: es for es in self.exclusive_sets}

    def groups(self) -> dict[UserSubset, list[MessagePlan]]:
        grouped: dict[UserSubset, list[MessagePlan]] = {}
        for message in self.messages:
            grouped.setdefault(message.subset, []).append(message)
        return grouped
