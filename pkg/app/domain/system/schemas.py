"""Pydantic schemas describing one simulation scenario."""
from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

from app.core.config import settings
from app.core.validation import parse_mu


class PlacementMode(str, Enum):
    """How files are assigned to user storage."""

    CENTRALIZED = "centralized"
    DECENTRALIZED = "decentralized"


class DownlinkMode(str, Enum):
    """How the access point builds downlink blocks."""

    MDS = "mds"
    RANDOM = "random"
    FORWARD = "forward"

    @classmethod
    def _missing_(cls, value: object) -> Optional["DownlinkMode"]:
        aliases = {"randomretry": cls.RANDOM, "random_retry": cls.RANDOM, "random-retry": cls.RANDOM}
        if isinstance(value, str):
            return aliases.get(value.strip().lower())
        return None


class Baseline(str, Enum):
    """Coded shuffle or the uncoded pass-through reference."""

    CODED = "coded"
    UNCODED = "uncoded"


StorageFraction = Annotated[Fraction, BeforeValidator(parse_mu)]


class SystemConfig(BaseModel):
    """All parameters of one run; the single source of truth for it."""

    users: int
    files: int
    mu: StorageFraction
    value_bits: int = Field(default_factory=lambda: settings.DEFAULT_VALUE_BITS)
    file_bits: int = Field(default_factory=lambda: settings.DEFAULT_FILE_BITS)
    input_bits: int = Field(default_factory=lambda: settings.DEFAULT_INPUT_BITS)
    output_bits: int = Field(default_factory=lambda: settings.DEFAULT_OUTPUT_BITS)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    placement_mode: PlacementMode = PlacementMode.CENTRALIZED
    downlink_mode: DownlinkMode = DownlinkMode.MDS
    baseline: Baseline = Baseline.CODED
    population: Optional[int] = None
    retry_limit: int = Field(default_factory=lambda: settings.RETRY_LIMIT)

    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        arbitrary_types_allowed=True,
        use_enum_values=False,
    )

    def echo(self) -> dict[str, Any]:
        """Flat, string-friendly view used in records and CSV rows."""
        return {
            "users": self.users,
            "files": self.files,
            "mu": str(self.mu),
            "value_bits": self.value_bits,
            "file_bits": self.file_bits,
            "input_bits": self.input_bits,
            "output_bits": self.output_bits,
            "seed": self.seed,
            "placement_mode": self.placement_mode.value,
            "downlink_mode": self.downlink_mode.value,
            "baseline": self.baseline.value,
            "population": self.population if self.population is not None else self.users,
            "retry_limit": self.retry_limit,
        }


class SharingPartition(BaseModel):
    """Split of the file set between two integer-replication sub-placements."""

    low_replication: int
    high_replication: int
    alpha: Fraction
    low_files: int
    high_files: int

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def sub_fractions(self, users: int) -> tuple[Fraction, Fraction]:
        return Fraction(self.low_replication, users), Fraction(self.high_replication, users)


class ValidatedConfig(BaseModel):
    """A config accepted by ``validate_config`` plus its derived quantities."""

    config: SystemConfig
    replication: Fraction
    batch_count: Optional[int] = None
    batch_size: Optional[int] = None
    stored_per_user: int
    storage_floored: bool = False
    sharing: Optional[SharingPartition] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def integer_replication(self) -> bool:
        return self.replication.denominator == 1

    @property
    def replication_levels(self) -> tuple[int, ...]:
        """Replication factors present in a centralized placement."""
        if self.sharing is not None:
            return (self.sharing.low_replication, self.sharing.high_replication)
        if self.integer_replication:
            return (int(self.replication),)
        return ()
