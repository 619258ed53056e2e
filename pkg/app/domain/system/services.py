"""Scenario validation, dataset synthesis and the single-node oracle."""
from __future__ import annotations

import hashlib
import logging
import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from app.core.bits import BitVector, bits_from_bytes, bits_to_bytes, concat_bits
from app.core.config import settings
from app.core.errors import (
    ConfigError,
    DivisibilityViolation,
    EmptyAvailableSet,
    MuOutOfRange,
    ZeroSize,
)
from app.domain.placement.services import memory_sharing_partition, suggest_file_count
from app.domain.system.models import ComputeFunctions, Dataset
from app.domain.system.schemas import PlacementMode, SystemConfig, ValidatedConfig
from app.domain.system.streams import STREAM_DATASET, stream_rng

logger = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1
_DIGEST_BYTES = 64


def validate_config(cfg: SystemConfig) -> ValidatedConfig:
    """Check model invariants and attach derived quantities."""
    sizes = {
        "users": cfg.users,
        "files": cfg.files,
        "value_bits": cfg.value_bits,
        "file_bits": cfg.file_bits,
        "input_bits": cfg.input_bits,
        "output_bits": cfg.output_bits,
        "retry_limit": cfg.retry_limit,
    }
    for name, value in sizes.items():
        if value <= 0:
            raise ZeroSize(f"{name} must be positive, got {value}")

    if not 0 <= cfg.seed <= MAX_SEED:
        raise ConfigError(f"seed must fit in 64 unsigned bits, got {cfg.seed}")

    K, N, mu = cfg.users, cfg.files, cfg.mu
    if mu < Fraction(1, K) or mu > 1:
        raise MuOutOfRange(f"mu={mu} outside [1/{K}, 1]")

    if cfg.population is not None:
        if cfg.placement_mode is not PlacementMode.DECENTRALIZED:
            raise ConfigError("population applies to decentralized placement only")
        if cfg.population < K:
            raise ConfigError(f"population {cfg.population} smaller than {K} participating users")

    replication = mu * K
    stored_exact = mu * N

    if cfg.placement_mode is PlacementMode.DECENTRALIZED:
        stored = math.floor(stored_exact)
        if stored == 0:
            raise ZeroSize(f"mu*N={stored_exact} leaves users with no files")
        floored = stored_exact.denominator != 1
        if floored:
            logger.warning("mu*N=%s is not an integer; each user stores %d files", stored_exact, stored)
        return ValidatedConfig(
            config=cfg,
            replication=replication,
            stored_per_user=stored,
            storage_floored=floored,
        )

    if replication.denominator == 1:
        t = int(replication)
        batch_count = math.comb(K, t)
        if N % batch_count:
            raise DivisibilityViolation(
                f"files={N} is not a multiple of C({K},{t})={batch_count}",
                suggested_files=suggest_file_count(K, mu, N),
            )
        return ValidatedConfig(
            config=cfg,
            replication=replication,
            batch_count=batch_count,
            batch_size=N // batch_count,
            stored_per_user=int(stored_exact),
        )

    sharing = memory_sharing_partition(K, mu, N)
    low_batches = math.comb(K, sharing.low_replication)
    high_batches = math.comb(K, sharing.high_replication)
    if sharing.low_files % low_batches or sharing.high_files % high_batches:
        raise DivisibilityViolation(
            f"files={N} splits into {sharing.low_files}+{sharing.high_files}, which must be multiples "
            f"of C({K},{sharing.low_replication})={low_batches} and C({K},{sharing.high_replication})={high_batches}",
            suggested_files=suggest_file_count(K, mu, N),
        )
    return ValidatedConfig(
        config=cfg,
        replication=replication,
        batch_count=low_batches + high_batches,
        stored_per_user=int(stored_exact),
        sharing=sharing,
    )


def synthesize_dataset(cfg: SystemConfig) -> Dataset:
    """Seeded random files and inputs; identical seed gives identical data."""
    rng = stream_rng(cfg.seed, STREAM_DATASET)
    files = rng.integers(0, 2, size=(cfg.files, cfg.file_bits), dtype=np.uint8)
    inputs = rng.integers(0, 2, size=(cfg.users, cfg.input_bits), dtype=np.uint8)
    file_rows = tuple(_frozen(row) for row in files)
    input_rows = tuple(_frozen(row) for row in inputs)
    return Dataset(files=file_rows, inputs=input_rows)


def _frozen(bits: np.ndarray) -> BitVector:
    row = np.ascontiguousarray(bits, dtype=np.uint8)
    row.setflags(write=False)
    return row


def _keyed_digest(key: bytes, person: bytes, message: bytes, nbits: int) -> BitVector:
    """BLAKE2b in counter mode, truncated to ``nbits`` bits."""
    blocks: list[bytes] = []
    needed = (nbits + 7) // 8
    counter = 0
    while sum(len(block) for block in blocks) < needed:
        digest = hashlib.blake2b(
            message,
            digest_size=_DIGEST_BYTES,
            key=key,
            person=person,
            salt=counter.to_bytes(16, "little"),
        )
        blocks.append(digest.digest())
        counter += 1
    return _frozen(bits_from_bytes(b"".join(blocks), nbits))


def default_compute_functions(cfg: SystemConfig) -> ComputeFunctions:
    """Keyed-hash Map and Reduce so that any shuffle error changes outputs."""
    key = cfg.seed.to_bytes(8, "little")
    value_bits = cfg.value_bits
    output_bits = cfg.output_bits

    def map_value(input_bits: BitVector, file_bits: BitVector) -> BitVector:
        message = len(input_bits).to_bytes(4, "little") + bits_to_bytes(input_bits) + bits_to_bytes(file_bits)
        return _keyed_digest(key, b"map", message, value_bits)

    def reduce_values(values: Sequence[BitVector]) -> BitVector:
        return _keyed_digest(key, b"reduce", bits_to_bytes(concat_bits(list(values))), output_bits)

    return ComputeFunctions(
        map=map_value,
        reduce=reduce_values,
        value_bits=value_bits,
        output_bits=output_bits,
        hash_id=settings.HASH_PRIMITIVE,
    )


def oracle_output(
    cfg: SystemConfig,
    dataset: Dataset,
    fns: ComputeFunctions,
    k: int,
    available_files: Iterable[int],
) -> BitVector:
    """Single-node reference output for input ``k`` over ``available_files``."""
    files = sorted(set(available_files))
    if not files:
        raise EmptyAvailableSet(f"No files available for input {k}.")
    d_k = dataset.input(k)
    values = [fns.map(d_k, dataset.file(n)) for n in files]
    return fns.reduce(values)
