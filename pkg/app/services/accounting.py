"""Exact bit counters for the shuffle.

Counters add associatively, so totals do not depend on the order in which
subsets or grid points are tallied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterable, Sequence

from app.domain.access_point.models import DownlinkBlock
from app.domain.uplink.models import ExclusiveSet, UplinkMessage


@dataclass(frozen=True, slots=True)
class BitCounters:
    uplink_bits: int = 0
    downlink_bits: int = 0
    ideal_uplink_bits: Fraction = Fraction(0)
    ideal_downlink_bits: Fraction = Fraction(0)
    balanced_uplink_bits: Fraction = Fraction(0)
    balanced_downlink_bits: Fraction = Fraction(0)
    uplink_messages: int = 0
    downlink_blocks: int = 0
    byte_padding_bits: int = 0
    retries: int = 0

    def __add__(self, other: "BitCounters") -> "BitCounters":
        if not isinstance(other, BitCounters):
            return NotImplemented
        return BitCounters(
            **{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)}
        )


def ideal_bits(exclusive_sets: Iterable[ExclusiveSet], *, coded: bool, downlink: bool = False) -> Fraction:
    """Bits the shuffle would need with perfectly divisible payloads.

    Coded uplink spreads each exclusive set over its |W| owners; a coded
    downlink combination serves |W| + 1 users at once. Uncoded traffic carries
    every set once.
    """
    total = Fraction(0)
    for es in exclusive_sets:
        if not coded:
            total += es.payload_bits
        elif downlink:
            total += Fraction(es.payload_bits, len(es.owners) + 1)
        else:
            total += Fraction(es.payload_bits, len(es.owners))
    return total


def balanced_bits(exclusive_sets: Iterable[ExclusiveSet], *, coded: bool, downlink: bool = False) -> Fraction:
    """Bits the shuffle would need if every message of a subset had the same length.

    Same shape as :func:`ideal_bits` with each set rounded up to whole
    segments, so ``balanced - ideal`` is the ceiling split alone.
    """
    total = Fraction(0)
    for es in exclusive_sets:
        if not coded:
            total += es.payload_bits
            continue
        owners = len(es.owners)
        segment = math.ceil(Fraction(es.payload_bits, owners))
        total += Fraction(segment * owners, owners + 1) if downlink else segment
    return total


def tally_uplink(
    messages: Sequence[UplinkMessage],
    exclusive_sets: Sequence[ExclusiveSet],
    *,
    coded: bool,
) -> BitCounters:
    return BitCounters(
        uplink_bits=sum(message.bit_length for message in messages),
        ideal_uplink_bits=ideal_bits(exclusive_sets, coded=coded),
        balanced_uplink_bits=balanced_bits(exclusive_sets, coded=coded),
        uplink_messages=sum(1 for message in messages if message.bit_length),
    )


def tally_downlink(
    blocks: Sequence[DownlinkBlock],
    exclusive_sets: Sequence[ExclusiveSet],
    *,
    coded: bool,
    forwarding: bool,
) -> BitCounters:
    downlink = not forwarding
    return BitCounters(
        downlink_bits=sum(block.bit_length for block in blocks),
        ideal_downlink_bits=ideal_bits(exclusive_sets, coded=coded, downlink=downlink),
        balanced_downlink_bits=balanced_bits(exclusive_sets, coded=coded, downlink=downlink),
        downlink_blocks=sum(1 for block in blocks if block.bit_length),
        byte_padding_bits=sum(block.padding_bits for block in blocks),
        retries=sum(block.retries for block in blocks),
    )
