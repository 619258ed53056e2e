"""Dataset placement: who stores which files, and placement statistics."""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from itertools import combinations
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from app.core.errors import ConfigError, DivisibilityViolation
from app.domain.placement.models import Placement, PlacementKind, ReplicationHistogram
from app.domain.system.schemas import PlacementMode, SharingPartition, SystemConfig
from app.domain.system.streams import STREAM_PARTICIPANTS, STREAM_PLACEMENT, stream_rng

if TYPE_CHECKING:
    from app.domain.system.schemas import ValidatedConfig

logger = logging.getLogger(__name__)


def _readonly(values: Sequence[int] | np.ndarray) -> np.ndarray:
    array = np.array(sorted(int(v) for v in values), dtype=np.int64)
    array.setflags(write=False)
    return array


def _place_batches(
    users: int,
    replication: int,
    first_file: int,
    count: int,
) -> tuple[list[list[int]], dict[tuple[int, ...], tuple[int, ...]]]:
    """Give each size-``replication`` subset (lexicographic) its own batch."""
    subsets = list(combinations(range(1, users + 1), replication))
    if count % len(subsets):
        raise DivisibilityViolation(
            f"{count} files cannot be split evenly over C({users},{replication})={len(subsets)} batches"
        )
    size = count // len(subsets)
    stored: list[list[int]] = [[] for _ in range(users)]
    batches: dict[tuple[int, ...], tuple[int, ...]] = {}
    for index, subset in enumerate(subsets):
        start = first_file + index * size
        batch = tuple(range(start, start + size))
        batches[subset] = batch
        for k in subset:
            stored[k - 1].extend(batch)
    return stored, batches


def centralized_placement(cfg: SystemConfig) -> Placement:
    """Each file stored by exactly mu*K users, one batch per user subset."""
    replication = cfg.mu * cfg.users
    if replication.denominator != 1:
        raise ConfigError(f"mu*K={replication} is not an integer; use memory sharing")
    t = int(replication)
    stored, batches = _place_batches(cfg.users, t, 1, cfg.files)
    logger.debug("Centralized placement: %d batches of %d files", len(batches), cfg.files // len(batches))
    return Placement(
        kind=PlacementKind.CENTRALIZED,
        file_count=cfg.files,
        user_files=tuple(_readonly(files) for files in stored),
        batches=batches,
        metadata={"replication": t, "batch_size": cfg.files // len(batches)},
    )


def memory_sharing_partition(users: int, mu: Fraction, files: int) -> SharingPartition:
    """Split files between replication floor(mu*K) and ceil(mu*K)."""
    replication = Fraction(mu) * users
    if replication.denominator == 1:
        raise ConfigError(f"mu*K={replication} is an integer; use centralized placement")
    low = math.floor(replication)
    high = math.ceil(replication)
    alpha = Fraction(high) - replication
    low_files = alpha * files
    if low_files.denominator != 1:
        raise DivisibilityViolation(
            f"alpha*N={low_files} is not an integer for N={files}",
            suggested_files=suggest_file_count(users, mu, files),
        )
    return SharingPartition(
        low_replication=low,
        high_replication=high,
        alpha=alpha,
        low_files=int(low_files),
        high_files=files - int(low_files),
    )


def suggest_file_count(users: int, mu: Fraction, files: int) -> int:
    """Smallest N' >= ``files`` accepted by the centralized placements."""
    replication = Fraction(mu) * users
    if replication.denominator == 1:
        step = math.comb(users, int(replication))
    else:
        low, high = math.floor(replication), math.ceil(replication)
        alpha = Fraction(high) - replication
        # alpha*N' multiple of C(K, low) and (1-alpha)*N' multiple of C(K, high)
        low_step = _multiple_step(alpha, math.comb(users, low))
        high_step = _multiple_step(1 - alpha, math.comb(users, high))
        step = math.lcm(low_step, high_step)
    return max(step, -(-files // step) * step)


def _multiple_step(share: Fraction, modulus: int) -> int:
    """Smallest positive N with share*N an integer multiple of ``modulus``."""
    target = share.denominator * modulus
    return target // math.gcd(share.numerator, target)


def memory_sharing_placement(cfg: SystemConfig) -> Placement:
    """Two centralized sub-placements realizing a non-integer mu*K."""
    sharing = memory_sharing_partition(cfg.users, cfg.mu, cfg.files)
    low_stored, low_batches = _place_batches(cfg.users, sharing.low_replication, 1, sharing.low_files)
    high_stored, high_batches = _place_batches(
        cfg.users, sharing.high_replication, sharing.low_files + 1, sharing.high_files
    )
    stored = [low + high for low, high in zip(low_stored, high_stored)]
    logger.debug(
        "Memory sharing: %d files at replication %d, %d files at replication %d",
        sharing.low_files,
        sharing.low_replication,
        sharing.high_files,
        sharing.high_replication,
    )
    return Placement(
        kind=PlacementKind.MEMORY_SHARING,
        file_count=cfg.files,
        user_files=tuple(_readonly(files) for files in stored),
        batches={**low_batches, **high_batches},
        sharing=sharing,
        metadata={"alpha": str(sharing.alpha)},
    )


def decentralized_placement(cfg: SystemConfig) -> Placement:
    """Every user independently stores floor(mu*N) uniformly random files.

    With ``population`` larger than K, the whole population stores files and a
    uniformly random set of K participants is revealed afterwards; the
    returned placement covers the participants only, relabelled 1..K.
    """
    exact = cfg.mu * cfg.files
    per_user = math.floor(exact)
    population = cfg.population or cfg.users
    rng = stream_rng(cfg.seed, STREAM_PLACEMENT)
    everyone = [
        np.sort(rng.choice(cfg.files, size=per_user, replace=False)) + 1 for _ in range(population)
    ]

    if population > cfg.users:
        chooser = stream_rng(cfg.seed, STREAM_PARTICIPANTS)
        labels = tuple(int(x) + 1 for x in np.sort(chooser.choice(population, size=cfg.users, replace=False)))
    else:
        labels = tuple(range(1, cfg.users + 1))

    user_files = []
    for label in labels:
        files = everyone[label - 1].astype(np.int64)
        files.setflags(write=False)
        user_files.append(files)

    if exact.denominator != 1:
        logger.warning("Decentralized placement floors mu*N=%s to %d files per user", exact, per_user)
    return Placement(
        kind=PlacementKind.DECENTRALIZED,
        file_count=cfg.files,
        user_files=tuple(user_files),
        metadata={
            "stored_per_user": per_user,
            "storage_floored": exact.denominator != 1,
            "population": population,
            "participant_labels": labels,
        },
    )


def build_placement(validated: "ValidatedConfig") -> Placement:
    """Dispatch to the placement matching a validated config."""
    cfg = validated.config
    if cfg.placement_mode is PlacementMode.DECENTRALIZED:
        return decentralized_placement(cfg)
    if validated.sharing is not None:
        return memory_sharing_placement(cfg)
    return centralized_placement(cfg)


def replication_histogram(
    p: Placement,
    participants: Optional[Sequence[int]] = None,
) -> ReplicationHistogram:
    """Count files by the number of participants storing them."""
    members = tuple(participants) if participants is not None else p.all_users
    per_file = p.incidence(members).sum(axis=0)
    counts = np.bincount(per_file, minlength=len(members) + 1)
    return ReplicationHistogram(counts=tuple(int(c) for c in counts))


def information_loss(h: ReplicationHistogram) -> Fraction:
    """Fraction of files stored by no participant."""
    if h.file_count == 0:
        return Fraction(0)
    return Fraction(h.unstored, h.file_count)


def dump_placement(p: Placement) -> str:
    """Line-oriented text: a header, then one line of sorted files per user."""
    lines = [f"# files={p.file_count} kind={p.kind.value} users={p.users}"]
    for files in p.user_files:
        lines.append(" ".join(str(int(n)) for n in files))
    return "\n".join(lines) + "\n"


def _header_int(key: str, value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise ConfigError(f"Placement header {key}={value!r} is not an integer")
    if number < 1:
        raise ConfigError(f"Placement header {key}={number} must be positive")
    return number


def load_placement(text: str) -> Placement:
    """Inverse of ``dump_placement``; header optional.

    A blank line is a user with no files. Without a ``users=`` header,
    trailing blank lines are dropped.
    """
    file_count: Optional[int] = None
    user_count: Optional[int] = None
    kind = PlacementKind.CUSTOM
    rows: list[list[int]] = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if line.startswith("#"):
            for token in line.lstrip("#").split():
                key, _, value = token.partition("=")
                if key == "files":
                    file_count = _header_int(key, value)
                elif key == "users":
                    user_count = _header_int(key, value)
                elif key == "kind":
                    try:
                        kind = PlacementKind(value)
                    except ValueError:
                        choices = ", ".join(k.value for k in PlacementKind)
                        raise ConfigError(f"Unknown placement kind {value!r}; expected one of {choices}")
            continue
        try:
            rows.append([int(token) for token in line.split()])
        except ValueError:
            raise ConfigError(f"Malformed placement line: {raw_line!r}")

    while rows and not rows[-1]:
        rows.pop()
    if user_count is not None:
        if len(rows) > user_count:
            raise ConfigError(f"Placement lists {len(rows)} users, header says {user_count}")
        rows.extend([] for _ in range(user_count - len(rows)))
    if not rows:
        raise ConfigError("Placement text holds no users")
    highest = max((max(row) for row in rows if row), default=0)
    if file_count is None:
        file_count = highest
    if file_count == 0:
        raise ConfigError("Placement text holds no files")
    if any(n < 1 or n > file_count for row in rows for n in row):
        raise ConfigError(f"Placement references files outside 1..{file_count}")

    return Placement(
        kind=kind,
        file_count=file_count,
        user_files=tuple(_readonly(row) for row in rows),
    )
