"""User-side decoding of downlink blocks."""
from __future__ import annotations

import logging
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from app.core.bits import BitVector, byte_length, pack_bits, unpack_bits, xor_bits
from app.core.errors import InconsistentLengths, MissingSegment, SingularMatrix
from app.domain.access_point.models import DownlinkBlock
from app.domain.access_point.services import coefficient_matrix_for
from app.domain.compute.models import LocalValues
from app.domain.galois.field import combine_rows
from app.domain.galois.matrices import independent_rows, solve_linear_system
from app.domain.placement.models import Placement
from app.domain.system.schemas import Baseline, DownlinkMode, SystemConfig
from app.domain.uplink.models import ExclusiveSet, MessagePlan, Segment, UplinkPlan, UserSubset
from app.domain.uplink.services import plan_uplink

from .models import DecodedSegment, RecoveredValues, ReducedSystem

logger = logging.getLogger(__name__)

KnownSegment = Callable[[Segment], BitVector]


def _expected_bytes(plans: Sequence[MessagePlan], forwarding: bool) -> list[int]:
    if forwarding:
        return [byte_length(plan.bit_length) for plan in plans]
    longest = max((plan.bit_length for plan in plans), default=0)
    return [byte_length(longest)] * (len(plans[0].subset) - 1 if plans else 0)


def cancel_known(
    user: int,
    blocks: Sequence[DownlinkBlock],
    plans: Sequence[MessagePlan],
    coefficients: np.ndarray,
    known_segment: KnownSegment,
    *,
    forwarding: bool = False,
) -> ReducedSystem:
    """Strip every segment ``user`` already holds from the blocks of one subset.

    ``plans`` are the subset's uplink messages in canonical order and
    ``coefficients`` the re-derived block rows over them.
    """
    subset = plans[0].subset if plans else ()
    unknowns = tuple(
        segment for plan in plans for segment in plan.constituents if segment.target == user
    )
    if not unknowns:
        return ReducedSystem(user, subset, (), np.zeros((0, 0), np.uint8), np.zeros((0, 0), np.uint8))

    expected = _expected_bytes(plans, forwarding)
    if len(blocks) != len(expected):
        raise InconsistentLengths(f"subset {subset}: {len(blocks)} blocks received, {len(expected)} expected")
    for block, nbytes in zip(blocks, expected):
        if block.byte_length != nbytes:
            raise InconsistentLengths(
                f"subset {subset} block {block.index}: {block.byte_length} bytes, plan says {nbytes}"
            )
    width = max(expected)
    for segment in unknowns:
        if byte_length(segment.padded_bits) > width:
            raise InconsistentLengths(f"segment of {segment.padded_bits} bits exceeds {width}-byte blocks")

    known = np.zeros((len(plans), width), dtype=np.uint8)
    for position, plan in enumerate(plans):
        parts = [known_segment(segment) for segment in plan.constituents if segment.target != user]
        if parts:
            known[position] = pack_bits(xor_bits(parts, length=plan.bit_length), width)

    rows = len(blocks)
    matrix = np.zeros((rows, len(unknowns)), dtype=np.uint8)
    rhs = np.zeros((rows, width), dtype=np.uint8)
    carriers = [
        [position for position, plan in enumerate(plans) if any(seg is unknown for seg in plan.constituents)]
        for unknown in unknowns
    ]
    for j, block in enumerate(blocks):
        row = coefficients[j]
        rhs[j, : block.byte_length] = block.payload
        rhs[j] ^= combine_rows(row, known)
        for u, positions in enumerate(carriers):
            total = 0
            for position in positions:
                total ^= int(row[position])
            matrix[j, u] = total

    live = matrix.any(axis=1)
    return ReducedSystem(user, subset, unknowns, matrix[live], rhs[live])


def decode_subset(system: ReducedSystem) -> list[DecodedSegment]:
    """Solve a reduced system and strip zero padding from each segment."""
    if system.empty:
        return []
    unknown_count = len(system.unknowns)
    if system.matrix.shape[0] < unknown_count:
        raise SingularMatrix(
            f"user {system.user}, subset {system.subset}: {system.matrix.shape[0]} equations "
            f"for {unknown_count} unknown segments"
        )
    rows = independent_rows(system.matrix) if system.matrix.shape[0] > unknown_count else list(range(unknown_count))
    if len(rows) < unknown_count:
        raise SingularMatrix(f"user {system.user}, subset {system.subset}: rank {len(rows)} < {unknown_count}")
    solution = solve_linear_system(system.matrix[rows], system.rhs[rows])

    width_bits = system.rhs.shape[1] * 8
    decoded = []
    for segment, payload in zip(system.unknowns, solution):
        bits = unpack_bits(payload, width_bits)[: segment.padded_bits][: segment.payload_bits]
        decoded.append(DecodedSegment(segment=segment, bits=bits))
    return decoded


def reassemble(
    user: int,
    decoded: Iterable[DecodedSegment],
    exclusive_sets: Iterable[ExclusiveSet],
) -> RecoveredValues:
    """Concatenate segments by start offset and cut them back into values."""
    chunks: dict[tuple[int, UserSubset], list[DecodedSegment]] = {}
    for item in decoded:
        chunks.setdefault(item.segment.key, []).append(item)

    recovered = RecoveredValues(user=user)
    for es in exclusive_sets:
        if es.target != user:
            continue
        parts = sorted(chunks.get(es.key, []), key=lambda item: item.segment.start)
        cursor = 0
        pieces: list[BitVector] = []
        for item in parts:
            if item.segment.payload_bits == 0:
                continue
            if item.segment.start != cursor:
                raise MissingSegment(f"user {user}: gap at bit {cursor} of exclusive set owned by {es.owners}")
            pieces.append(item.bits)
            cursor += item.segment.payload_bits
        if cursor != es.payload_bits:
            raise MissingSegment(
                f"user {user}: {cursor} of {es.payload_bits} bits recovered for exclusive set owned by {es.owners}"
            )
        payload = np.concatenate(pieces) if pieces else np.zeros(0, dtype=np.uint8)
        for position, n in enumerate(es.files):
            value = payload[position * es.value_bits : (position + 1) * es.value_bits].copy()
            value.setflags(write=False)
            recovered.values[n] = value
    return recovered


class UserDecoder:
    """Everything user ``user`` does after the downlink: cancel, solve, reassemble.

    It works from its own map output, the placement, and the broadcast blocks;
    segment layout and coefficient rows are re-derived, never received.
    """

    def __init__(
        self,
        user: int,
        placement: Placement,
        local: LocalValues,
        cfg: SystemConfig,
        plan: Optional[UplinkPlan] = None,
    ) -> None:
        self.user = user
        self.local = local
        self.cfg = cfg
        coded = cfg.baseline is Baseline.CODED
        self.plan = plan or plan_uplink(placement, cfg.value_bits, coded=coded)
        self.forwarding = not coded or cfg.downlink_mode is DownlinkMode.FORWARD
        self._sets = self.plan.sets_by_key()
        self._payloads: dict[tuple[int, UserSubset], BitVector] = {}

    def _known_segment(self, segment: Segment) -> BitVector:
        payload = self._payloads.get(segment.key)
        if payload is None:
            es = self._sets[segment.key]
            payload = self.local.concat(es.target, es.files)
            self._payloads[segment.key] = payload
        return payload[segment.start : segment.start + segment.payload_bits]

    def _coefficients(self, subset: UserSubset, plans: Sequence[MessagePlan], count: int) -> np.ndarray:
        if self.forwarding:
            return np.eye(len(plans), dtype=np.uint8)[:count]
        matrix = coefficient_matrix_for(subset, len(subset) - 1, len(plans), self.cfg)
        return matrix.entries

    def decode(self, blocks: Iterable[DownlinkBlock]) -> RecoveredValues:
        by_subset: dict[UserSubset, list[DownlinkBlock]] = {}
        for block in blocks:
            if self.user in block.subset:
                by_subset.setdefault(block.subset, []).append(block)

        decoded: list[DecodedSegment] = []
        for subset, plans in self.plan.groups().items():
            if self.user not in subset:
                continue
            if not any(seg.target == self.user for plan in plans for seg in plan.constituents):
                continue
            received = sorted(by_subset.get(subset, []), key=lambda block: block.index)
            coefficients = self._coefficients(subset, plans, len(received))
            system = cancel_known(
                self.user,
                received,
                plans,
                coefficients,
                self._known_segment,
                forwarding=self.forwarding,
            )
            decoded.extend(decode_subset(system))

        recovered = reassemble(self.user, decoded, self.plan.exclusive_sets)
        logger.debug("User %d recovered %d values", self.user, len(recovered))
        return recovered
