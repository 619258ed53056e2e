from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values

from app.core.config import settings
from app.core.errors import ConfigError, ConfigFileError

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")


def parse_mu(value: Any, max_denominator: Optional[int] = None) -> Fraction:
    """Parse a user-provided storage fraction into an exact ``Fraction``.

    Accepts formats like:
      - "2/3" (exact, preferred)
      - "0.6667" (snapped to the closest fraction with a small denominator)
      - 1, 0.5, Fraction(3, 8)

    Raises ConfigError on clearly invalid input.
    """
    if value is None:
        raise ConfigError("mu is required")

    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)

    limit = max_denominator or settings.MU_MAX_DENOMINATOR
    if isinstance(value, float):
        return Fraction(value).limit_denominator(limit)

    s = str(value).strip()
    if s == "":
        raise ConfigError("mu is required")

    match = _FRACTION_RE.match(s)
    if match:
        numerator, denominator = int(match.group(1)), int(match.group(2))
        if denominator == 0:
            raise ConfigError(f"Could not parse mu '{value}': zero denominator")
        return Fraction(numerator, denominator)

    try:
        exact = Fraction(s)
    except ValueError:
        raise ConfigError(f"Could not parse mu '{value}'")

    if exact.denominator <= limit:
        return exact
    return exact.limit_denominator(limit)


def parse_int_list(value: Optional[str]) -> list[int]:
    """Parse "4,6,8" or a range "4:8" (inclusive) into integers."""
    if value is None or str(value).strip() == "":
        return []

    s = str(value).strip()
    if ":" in s:
        start_text, _, stop_text = s.partition(":")
        try:
            start, stop = int(start_text), int(stop_text)
        except ValueError:
            raise ConfigError(f"Could not parse integer range '{value}'")
        return list(range(start, stop + 1))

    values: list[int] = []
    for part in s.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            values.append(int(part))
        except ValueError:
            raise ConfigError(f"Could not parse integer '{part}'")
    return values


def parse_mu_list(value: Optional[str]) -> list[Fraction]:
    """Parse a comma-separated list of storage fractions."""
    if value is None or str(value).strip() == "":
        return []
    return [parse_mu(part) for part in str(value).split(",") if part.strip()]


def normalize_key(key: str) -> str:
    return key.strip().lower().lstrip("-").replace("-", "_")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Read ``key=value`` lines into a dict keyed by normalized flag names."""
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigFileError(f"Config file not found: {config_path}")

    raw = dotenv_values(config_path)
    values: dict[str, str] = {}
    for key, item in raw.items():
        if item is None:
            raise ConfigFileError(f"Config key '{key}' has no value in {config_path}")
        values[normalize_key(key)] = item.strip()
    return values
