"""The access point: relays uplink messages as downlink blocks.

It sees only the sender, subset and payload of each uplink message; it holds
no files and runs no Map or Reduce.
"""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from app.core.bits import byte_aligned, byte_length, pack_bits
from app.domain.galois.field import combine_rows
from app.domain.galois.matrices import CoefficientMatrix, mds_matrix, random_matrix_with_retry
from app.domain.system.schemas import Baseline, DownlinkMode, PlacementMode, SystemConfig
from app.domain.system.streams import STREAM_COEFFICIENTS, stream_rng
from app.domain.uplink.models import UplinkMessage, UserSubset

from .models import DownlinkBlock

logger = logging.getLogger(__name__)

MessageGroups = Mapping[UserSubset, Sequence[UplinkMessage]]


def group_by_subset(messages: Iterable[UplinkMessage]) -> dict[UserSubset, list[UplinkMessage]]:
    """Messages per subset, subsets sorted, arrival order kept inside a subset."""
    grouped: dict[UserSubset, list[UplinkMessage]] = {}
    for message in messages:
        grouped.setdefault(message.subset, []).append(message)
    return dict(sorted(grouped.items()))


@lru_cache(maxsize=512)
def _cached_mds(r: int, c: int) -> CoefficientMatrix:
    matrix = mds_matrix(r, c)
    matrix.entries.setflags(write=False)
    return matrix


@lru_cache(maxsize=8192)
def _cached_random(seed: int, subset: UserSubset, r: int, c: int, limit: int) -> CoefficientMatrix:
    rng = stream_rng(seed, STREAM_COEFFICIENTS, *subset)
    matrix, _ = random_matrix_with_retry(r, c, rng, limit=limit)
    matrix.entries.setflags(write=False)
    return matrix


def coefficient_matrix_for(subset: UserSubset, rows: int, columns: int, cfg: SystemConfig) -> CoefficientMatrix:
    """The combination matrix used for ``subset``; users re-derive it the same way."""
    if cfg.downlink_mode is DownlinkMode.RANDOM:
        return _cached_random(cfg.seed, tuple(subset), rows, columns, cfg.retry_limit)
    return _cached_mds(rows, columns)


def _payload_matrix(messages: Sequence[UplinkMessage], nbytes: int) -> np.ndarray:
    rows = np.zeros((len(messages), nbytes), dtype=np.uint8)
    for position, message in enumerate(messages):
        rows[position] = pack_bits(message.payload, nbytes)
    return rows


def _combine(groups: MessageGroups, cfg: SystemConfig) -> list[DownlinkBlock]:
    blocks: list[DownlinkBlock] = []
    for subset, messages in groups.items():
        columns = len(messages)
        rows = len(subset) - 1
        longest = max(message.bit_length for message in messages)
        if rows < 1 or longest == 0:
            continue
        matrix = coefficient_matrix_for(subset, rows, columns, cfg)
        nbytes = byte_length(longest)
        payloads = _payload_matrix(messages, nbytes)
        for j in range(rows):
            coefficients = matrix.row(j)
            payload = combine_rows(coefficients, payloads)
            payload.setflags(write=False)
            blocks.append(
                DownlinkBlock(
                    subset=subset,
                    index=j,
                    coefficients=coefficients,
                    payload=payload,
                    bit_length=byte_aligned(longest),
                    padding_bits=byte_aligned(longest) - longest,
                    retries=matrix.retries if j == 0 else 0,
                )
            )
        logger.debug("Subset %s: %d blocks of %d bytes", subset, rows, nbytes)
    return blocks


def encode_downlink_centralized(groups: MessageGroups, cfg: SystemConfig) -> list[DownlinkBlock]:
    """t combinations of the t+1 messages of every subset."""
    for subset, messages in groups.items():
        if len(messages) != len(subset):
            raise ValueError(f"subset {subset} carries {len(messages)} messages, expected {len(subset)}")
    return _combine(groups, cfg)


def encode_downlink_decentralized(groups: MessageGroups, cfg: SystemConfig) -> list[DownlinkBlock]:
    """|S| - 1 combinations per active subset; block length is the longest message."""
    return _combine(groups, cfg)


def forward_uncoded(messages: Iterable[UplinkMessage]) -> list[DownlinkBlock]:
    """One block per message, payload copied verbatim."""
    blocks: list[DownlinkBlock] = []
    for subset, group in group_by_subset(messages).items():
        for position, message in enumerate(group):
            coefficients = np.zeros(len(group), dtype=np.uint8)
            coefficients[position] = 1
            payload = pack_bits(message.payload)
            payload.setflags(write=False)
            blocks.append(
                DownlinkBlock(
                    subset=subset,
                    index=position,
                    coefficients=coefficients,
                    payload=payload,
                    bit_length=message.bit_length,
                )
            )
    return blocks


class AccessPoint:
    """Relay configured for one run."""

    def __init__(self, cfg: SystemConfig) -> None:
        self.cfg = cfg
        self.retries = 0

    @property
    def forwarding(self) -> bool:
        return self.cfg.baseline is Baseline.UNCODED or self.cfg.downlink_mode is DownlinkMode.FORWARD

    def relay(self, messages: Sequence[UplinkMessage]) -> list[DownlinkBlock]:
        if self.cfg.baseline is Baseline.UNCODED:
            if self.cfg.downlink_mode is not DownlinkMode.FORWARD:
                logger.info(
                    "Uncoded baseline forwards uplink messages; downlink mode %s ignored",
                    self.cfg.downlink_mode.value,
                )
            blocks = forward_uncoded(messages)
        elif self.cfg.downlink_mode is DownlinkMode.FORWARD:
            blocks = forward_uncoded(messages)
        elif self.cfg.placement_mode is PlacementMode.CENTRALIZED:
            blocks = encode_downlink_centralized(group_by_subset(messages), self.cfg)
        else:
            blocks = encode_downlink_decentralized(group_by_subset(messages), self.cfg)

        self.retries = sum(block.retries for block in blocks)
        logger.info(
            "Access point relayed %d uplink messages as %d downlink blocks",
            len(messages),
            len(blocks),
        )
        return blocks
