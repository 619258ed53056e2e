"""Scenario flags shared by the sub-commands, and config-file merging."""
from __future__ import annotations

import argparse
from typing import Any

from pydantic import ValidationError

from app.core.errors import ConfigError, ConfigFileError
from app.core.validation import normalize_key, read_config_file
from app.domain.system.schemas import Baseline, DownlinkMode, PlacementMode, SystemConfig

# flag name -> SystemConfig field
SCENARIO_KEYS = {
    "users": "users",
    "files": "files",
    "mu": "mu",
    "value_bits": "value_bits",
    "file_bits": "file_bits",
    "input_bits": "input_bits",
    "output_bits": "output_bits",
    "seed": "seed",
    "mode": "placement_mode",
    "downlink": "downlink_mode",
    "baseline": "baseline",
    "population": "population",
    "retry_limit": "retry_limit",
}


def add_scenario_arguments(parser: argparse.ArgumentParser, *, lists: bool = False) -> None:
    """Flags describing one scenario; with ``lists`` the grid flags take lists."""
    parser.add_argument("--config", help="key=value file; flags override it")
    parser.add_argument(
        "--users",
        type=str if lists else int,
        help="number of users K" + (" list, e.g. 4,6 or 4:8" if lists else ""),
    )
    parser.add_argument("--files", type=int, help="number of files N")
    parser.add_argument("--mu", help='storage fraction, "p/q" or decimal')
    parser.add_argument("--value-bits", type=int, help="bits per intermediate value T")
    parser.add_argument("--file-bits", type=int, help="bits per file F")
    parser.add_argument("--input-bits", type=int, help="bits per input D")
    parser.add_argument("--output-bits", type=int, help="bits per output B")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument(
        "--mode",
        help="placement mode" + (" list" if lists else ""),
        **({} if lists else {"choices": [m.value for m in PlacementMode]}),
    )
    parser.add_argument("--downlink", help="downlink coding: mds, random or forward")
    parser.add_argument(
        "--baseline",
        help="coded or uncoded" + (" list" if lists else ""),
        **({} if lists else {"choices": [b.value for b in Baseline]}),
    )
    parser.add_argument("--population", type=int, help="decentralized population size (>= K)")
    parser.add_argument("--retry-limit", type=int, help="resample cap for random downlink matrices")


def scenario_values(args: argparse.Namespace) -> dict[str, Any]:
    """Config-file values overridden by explicitly given flags, keyed by flag name."""
    values: dict[str, Any] = {}
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            if key not in SCENARIO_KEYS:
                raise ConfigFileError(f"Unknown config key '{key}'")
            values[key] = value
    for key in SCENARIO_KEYS:
        value = getattr(args, normalize_key(key), None)
        if value is not None:
            values[key] = value
    return values


def build_config(values: dict[str, Any], **overrides: Any) -> SystemConfig:
    """Turn flag-keyed values into a ``SystemConfig``; any rejection is a ConfigError."""
    merged = {**values, **{key: value for key, value in overrides.items() if value is not None}}
    for required in ("users", "files", "mu"):
        if merged.get(required) in (None, ""):
            raise ConfigError(f"--{required} is required")

    fields: dict[str, Any] = {}
    for key, value in merged.items():
        field = SCENARIO_KEYS.get(key)
        if field is None:
            raise ConfigError(f"Unknown scenario key '{key}'")
        fields[field] = value

    try:
        if "placement_mode" in fields:
            fields["placement_mode"] = PlacementMode(str(fields["placement_mode"]).strip().lower())
        if "downlink_mode" in fields:
            fields["downlink_mode"] = DownlinkMode(str(fields["downlink_mode"]).strip().lower())
        if "baseline" in fields:
            fields["baseline"] = Baseline(str(fields["baseline"]).strip().lower())
        return SystemConfig(**fields)
    except ValueError as exc:
        # pydantic's ValidationError is a ValueError too
        detail = _validation_detail(exc) if isinstance(exc, ValidationError) else str(exc)
        raise ConfigError(f"Invalid scenario: {detail}") from exc


def _validation_detail(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error.get("loc", ()))
        parts.append(f"{location}: {error.get('msg')}")
    return "; ".join(parts)
