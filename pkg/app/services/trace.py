"""Line-delimited JSON trace of uplink messages and downlink blocks."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator, TextIO

import numpy as np

from app.domain.access_point.models import DownlinkBlock
from app.domain.uplink.models import UplinkMessage, UplinkPlan


def _coerce(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_coerce(item) for item in value.tolist()]
    if isinstance(value, dict):
        return {key: _coerce(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_coerce(item) for item in value]
    return value


def uplink_records(messages: Iterable[UplinkMessage], plan: UplinkPlan) -> Iterator[dict[str, Any]]:
    """Messages paired with the plan entries that describe their segments."""
    for message, layout in zip(messages, plan.messages, strict=True):
        yield {
            "kind": "uplink",
            "sender": message.sender,
            "subset": list(message.subset),
            "bits": message.bit_length,
            "padded_bits": message.bit_length - layout.useful_bits,
        }


def downlink_records(blocks: Iterable[DownlinkBlock]) -> Iterator[dict[str, Any]]:
    for block in blocks:
        yield {
            "kind": "downlink",
            "subset": list(block.subset),
            "index": block.index,
            "bits": block.bit_length,
            "padded_bits": block.padding_bits,
            "coefficients": block.coefficients,
        }


def write_trace(
    target: str | Path | TextIO,
    messages: Iterable[UplinkMessage],
    plan: UplinkPlan,
    blocks: Iterable[DownlinkBlock],
    header: dict[str, Any] | None = None,
) -> int:
    """Write one JSON object per line; returns the number of records."""
    records: list[dict[str, Any]] = []
    if header is not None:
        records.append({"kind": "run", **header})
    records.extend(uplink_records(messages, plan))
    records.extend(downlink_records(blocks))

    lines = [json.dumps(_coerce(record), sort_keys=True) for record in records]
    if isinstance(target, (str, Path)):
        Path(target).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        target.write("\n".join(lines) + "\n")
    return len(records)
