"""Exclusive-set indexing, segment association and uplink message encoding."""
from __future__ import annotations

import logging
import math
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from app.core.bits import xor_bits
from app.domain.compute.models import MapOutput
from app.domain.placement.models import Placement, PlacementKind
from app.domain.system.schemas import SystemConfig

from .models import ExclusiveSet, MessagePlan, Segment, UplinkMessage, UplinkPlan, UserSubset

logger = logging.getLogger(__name__)

_CENTRALIZED_KINDS = (PlacementKind.CENTRALIZED, PlacementKind.MEMORY_SHARING)


def owner_groups(
    placement: Placement,
    participants: Optional[Sequence[int]] = None,
) -> dict[UserSubset, tuple[int, ...]]:
    """Group stored files by the exact set of participants holding them."""
    members = tuple(participants) if participants is not None else placement.all_users
    incidence = placement.incidence(members)
    if incidence.shape[1] == 0:
        return {}
    patterns, inverse = np.unique(incidence.T, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    groups: dict[UserSubset, tuple[int, ...]] = {}
    for index, pattern in enumerate(patterns):
        if not pattern.any():
            continue
        owners = tuple(members[row] for row in np.flatnonzero(pattern))
        files = tuple(int(n) + 1 for n in np.flatnonzero(inverse == index))
        groups[owners] = files
    return dict(sorted(groups.items()))


def _exclusive_layout(
    placement: Placement,
    value_bits: int,
    participants: Optional[Sequence[int]] = None,
) -> list[ExclusiveSet]:
    members = tuple(participants) if participants is not None else placement.all_users
    sets: list[ExclusiveSet] = []
    for owners, files in owner_groups(placement, members).items():
        for target in members:
            if target in owners:
                continue
            sets.append(ExclusiveSet(target=target, owners=owners, files=files, value_bits=value_bits))
    sets.sort(key=lambda es: (es.subset, es.target))
    return sets


def build_exclusive_sets(
    placement: Placement,
    map_output: MapOutput,
    participants: Optional[Sequence[int]] = None,
) -> list[ExclusiveSet]:
    """Every nonempty exclusive set with its payload, ordered by (subset, target)."""
    sets = []
    for es in _exclusive_layout(placement, map_output.value_bits, participants):
        owner = map_output.local(es.owners[0])
        payload = owner.concat(es.target, es.files)
        sets.append(
            ExclusiveSet(
                target=es.target,
                owners=es.owners,
                files=es.files,
                value_bits=es.value_bits,
                payload=payload,
            )
        )
    logger.debug("Built %d exclusive sets", len(sets))
    return sets


def segment_split(es: ExclusiveSet, senders: Sequence[int]) -> list[Segment]:
    """Ceiling split of an exclusive set into one contiguous chunk per sender."""
    ordered = sorted(senders)
    if len(ordered) != len(es.owners):
        raise ValueError(f"{len(ordered)} senders for an exclusive set owned by {len(es.owners)} users")
    total = es.payload_bits
    padded = math.ceil(total / len(ordered)) if total else 0
    segments = []
    for position, sender in enumerate(ordered):
        start = min(position * padded, total)
        end = min(start + padded, total)
        chunk = es.payload[start:end] if es.payload is not None else None
        segments.append(
            Segment(
                target=es.target,
                owners=es.owners,
                sender=sender,
                start=start,
                payload_bits=end - start,
                padded_bits=padded,
                payload=chunk,
            )
        )
    return segments


def _coded_plans(exclusive_sets: Iterable[ExclusiveSet], subsets: Iterable[UserSubset]) -> list[MessagePlan]:
    by_slot: dict[tuple[UserSubset, int], list[Segment]] = {}
    for es in exclusive_sets:
        for segment in segment_split(es, es.owners):
            by_slot.setdefault((es.subset, segment.sender), []).append(segment)

    plans = []
    for subset in sorted(subsets):
        for sender in subset:
            constituents = sorted(by_slot.pop((subset, sender), []), key=lambda seg: seg.target)
            plans.append(MessagePlan(sender=sender, subset=subset, constituents=tuple(constituents)))
    if by_slot:
        orphaned = sorted({subset for subset, _ in by_slot})
        raise ValueError(f"segments left without a message for subsets {orphaned}")
    return plans


def _uncoded_plans(exclusive_sets: Iterable[ExclusiveSet]) -> list[MessagePlan]:
    plans = []
    for es in sorted(exclusive_sets, key=lambda item: (item.subset, item.target)):
        sender = es.owners[0]
        segment = Segment(
            target=es.target,
            owners=es.owners,
            sender=sender,
            start=0,
            payload_bits=es.payload_bits,
            padded_bits=es.payload_bits,
            payload=es.payload,
        )
        plans.append(MessagePlan(sender=sender, subset=es.subset, constituents=(segment,)))
    return plans


def _centralized_subsets(exclusive_sets: Sequence[ExclusiveSet], users: int) -> list[UserSubset]:
    levels = sorted({len(es.owners) for es in exclusive_sets})
    subsets: list[UserSubset] = []
    for t in levels:
        subsets.extend(combinations(range(1, users + 1), t + 1))
    return subsets


def _active_subsets(exclusive_sets: Sequence[ExclusiveSet]) -> list[UserSubset]:
    return sorted({es.subset for es in exclusive_sets if es.files})


def _materialize(plans: Iterable[MessagePlan]) -> list[UplinkMessage]:
    messages = []
    for plan in plans:
        parts = [segment.payload for segment in plan.constituents]
        if any(part is None for part in parts):
            raise ValueError("exclusive sets carry no payload; build them from a map output")
        payload = xor_bits(parts, length=plan.bit_length)
        payload.setflags(write=False)
        messages.append(UplinkMessage(sender=plan.sender, subset=plan.subset, payload=payload))
    return messages


def encode_centralized_uplink(exclusive_sets: Sequence[ExclusiveSet], cfg: SystemConfig) -> list[UplinkMessage]:
    """One XOR message per sender for every subset of size t+1, per replication level t."""
    subsets = _centralized_subsets(exclusive_sets, cfg.users)
    messages = _materialize(_coded_plans(exclusive_sets, subsets))
    logger.info("Centralized uplink: %d messages over %d subsets", len(messages), len(subsets))
    return messages


def encode_decentralized_uplink(exclusive_sets: Sequence[ExclusiveSet], cfg: SystemConfig) -> list[UplinkMessage]:
    """XOR messages for every subset S (|S| >= 2) holding at least one nonempty exclusive set."""
    subsets = _active_subsets(exclusive_sets)
    messages = _materialize(_coded_plans(exclusive_sets, subsets))
    logger.info(
        "Decentralized uplink: %d messages over %d active subsets of %d users",
        len(messages),
        len(subsets),
        cfg.users,
    )
    return messages


def encode_uncoded_uplink(exclusive_sets: Sequence[ExclusiveSet]) -> list[UplinkMessage]:
    """Each exclusive set sent raw by its lexicographically first owner."""
    messages = _materialize(_uncoded_plans(exclusive_sets))
    logger.info("Uncoded uplink: %d messages", len(messages))
    return messages


def plan_uplink(
    placement: Placement,
    value_bits: int,
    *,
    coded: bool = True,
    participants: Optional[Sequence[int]] = None,
) -> UplinkPlan:
    """Message layout re-derived from placement alone, as every user can."""
    sets = _exclusive_layout(placement, value_bits, participants)
    if not coded:
        plans = _uncoded_plans(sets)
    elif placement.kind in _CENTRALIZED_KINDS:
        plans = _coded_plans(sets, _centralized_subsets(sets, placement.users))
    else:
        plans = _coded_plans(sets, _active_subsets(sets))
    return UplinkPlan(exclusive_sets=tuple(sets), messages=tuple(plans), coded=coded)
