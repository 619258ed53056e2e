from typing import Any

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


def _normalize_log_level(value: Any) -> str:
    """Accept any casing and surrounding whitespace for log levels."""
    if value is None or value == "":
        return "INFO"
    return str(value).strip().upper()


DEFAULT_FIELD_POLYNOMIAL = 0x11D
DEFAULT_HASH_PRIMITIVE = "blake2b"


class Settings(BaseSettings):
    """Process-wide simulator settings."""

    # Application
    APP_NAME: str = "Shufflecast"
    CODE_VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = ""

    # Scenario defaults (bits)
    DEFAULT_VALUE_BITS: int = 64
    DEFAULT_FILE_BITS: int = 256
    DEFAULT_INPUT_BITS: int = 32
    DEFAULT_OUTPUT_BITS: int = 64
    DEFAULT_SEED: int = 7

    # Downlink coefficient search
    RETRY_LIMIT: int = 64

    # Simulation limits; larger scenarios are evaluated analytically
    MAX_SIM_USERS_CENTRALIZED: int = 14
    MAX_SIM_USERS_DECENTRALIZED: int = 12
    MAX_SIM_FILES: int = 200_000
    SWEEP_DECENTRALIZED_FILES: int = 1000

    # Parsing and reporting
    MU_MAX_DENOMINATOR: int = 100
    FLOAT_DIGITS: int = 12

    # Primitives echoed in run metadata
    HASH_PRIMITIVE: str = DEFAULT_HASH_PRIMITIVE
    FIELD_POLYNOMIAL: int = Field(default=DEFAULT_FIELD_POLYNOMIAL)

    model_config = SettingsConfigDict(
        env_file=".env",
        extra="ignore",
        populate_by_name=True,
    )

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def parse_log_level(cls, value: Any) -> str:
        """Support lower-case LOG_LEVEL from environment."""
        return _normalize_log_level(value)


def _validate_settings() -> None:
    """Fail fast on settings the simulator cannot honour."""
    if settings.RETRY_LIMIT < 1:
        raise ValueError("RETRY_LIMIT must be at least 1.")

    if settings.FLOAT_DIGITS < 1:
        raise ValueError("FLOAT_DIGITS must be at least 1.")

    if settings.MU_MAX_DENOMINATOR < 1:
        raise ValueError("MU_MAX_DENOMINATOR must be at least 1.")

    if settings.FIELD_POLYNOMIAL != DEFAULT_FIELD_POLYNOMIAL:
        raise ValueError("Only the 0x11D reduction polynomial is supported.")

    if settings.HASH_PRIMITIVE != DEFAULT_HASH_PRIMITIVE:
        raise ValueError("Only the blake2b hash primitive is supported.")


settings = Settings()


_validate_settings()
