"""End-to-end run: placement, map, shuffle, reduce, verification, accounting."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from app.core.bits import BitVector
from app.core.config import settings
from app.core.errors import EmptyAvailableSet, OutputMismatch, SimulationLimitExceeded
from app.domain.access_point.models import DownlinkBlock
from app.domain.access_point.services import AccessPoint
from app.domain.compute.services import run_map, run_reduce
from app.domain.decoder.models import RecoveredValues
from app.domain.decoder.services import UserDecoder
from app.domain.placement.models import Placement
from app.domain.placement.services import build_placement, replication_histogram
from app.domain.system.models import ComputeFunctions
from app.domain.system.schemas import Baseline, PlacementMode, SystemConfig, ValidatedConfig
from app.domain.system.services import (
    default_compute_functions,
    oracle_output,
    synthesize_dataset,
    validate_config,
)
from app.domain.uplink.models import UplinkMessage
from app.domain.uplink.services import (
    build_exclusive_sets,
    encode_centralized_uplink,
    encode_decentralized_uplink,
    encode_uncoded_uplink,
    plan_uplink,
)
from app.services.accounting import tally_downlink, tally_uplink
from app.services.analytics import LoadReport, measure_loads
from app.services.trace import write_trace

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class RunRecord:
    """Everything needed to reproduce and report one run."""

    config: SystemConfig
    report: LoadReport
    duration_s: float
    metadata: dict[str, Any] = field(default_factory=dict)
    verified: bool = True


@dataclass(slots=True, eq=False)
class SimulationResult:
    record: RunRecord
    validated: ValidatedConfig
    placement: Placement
    messages: list[UplinkMessage]
    blocks: list[DownlinkBlock]
    recovered: dict[int, RecoveredValues]
    outputs: dict[int, BitVector]


def run_metadata(cfg: SystemConfig, placement: Optional[Placement] = None) -> dict[str, Any]:
    metadata: dict[str, Any] = {
        "hash_primitive": settings.HASH_PRIMITIVE,
        "field_polynomial": f"{settings.FIELD_POLYNOMIAL:#x}",
        "code_version": settings.CODE_VERSION,
        "downlink_matrix": cfg.downlink_mode.value,
    }
    if placement is not None:
        metadata["placement"] = placement.kind.value
        for key in ("stored_per_user", "storage_floored", "participant_labels", "alpha"):
            if key in placement.metadata:
                metadata[key] = placement.metadata[key]
    return metadata


def check_simulation_limits(cfg: SystemConfig) -> None:
    """Reject scenarios too large for bit-level simulation."""
    if cfg.placement_mode is PlacementMode.DECENTRALIZED:
        limit = settings.MAX_SIM_USERS_DECENTRALIZED
    else:
        limit = settings.MAX_SIM_USERS_CENTRALIZED
    if cfg.users > limit:
        raise SimulationLimitExceeded(
            f"K={cfg.users} exceeds the {cfg.placement_mode.value} simulation limit of {limit}; use --analytic"
        )
    if cfg.files > settings.MAX_SIM_FILES:
        raise SimulationLimitExceeded(f"N={cfg.files} exceeds MAX_SIM_FILES={settings.MAX_SIM_FILES}")


def _encode_uplink(cfg: SystemConfig, exclusive_sets) -> list[UplinkMessage]:
    if cfg.baseline is Baseline.UNCODED:
        return encode_uncoded_uplink(exclusive_sets)
    if cfg.placement_mode is PlacementMode.DECENTRALIZED:
        return encode_decentralized_uplink(exclusive_sets, cfg)
    return encode_centralized_uplink(exclusive_sets, cfg)


def run_simulation(
    cfg: SystemConfig,
    *,
    fns: Optional[ComputeFunctions] = None,
    trace_path: Optional[str | Path] = None,
) -> SimulationResult:
    """Execute every phase for ``cfg`` and verify each output against the oracle."""
    started = time.perf_counter()
    validated = validate_config(cfg)
    dataset = synthesize_dataset(cfg)
    fns = fns or default_compute_functions(cfg)

    placement = build_placement(validated)
    available = placement.available_files()
    if not available:
        raise EmptyAvailableSet("No participating user stores any file.")
    logger.info(
        "Run K=%d N=%d mu=%s mode=%s downlink=%s baseline=%s seed=%d",
        cfg.users,
        cfg.files,
        cfg.mu,
        cfg.placement_mode.value,
        cfg.downlink_mode.value,
        cfg.baseline.value,
        cfg.seed,
    )

    map_output = run_map(placement, dataset, fns)
    exclusive_sets = build_exclusive_sets(placement, map_output)
    messages = _encode_uplink(cfg, exclusive_sets)

    access_point = AccessPoint(cfg)
    blocks = access_point.relay(messages)

    coded = cfg.baseline is Baseline.CODED
    plan = plan_uplink(placement, cfg.value_bits, coded=coded)
    recovered: dict[int, RecoveredValues] = {}
    outputs: dict[int, BitVector] = {}
    mismatched: list[int] = []
    for k in placement.all_users:
        local = map_output.local(k)
        decoder = UserDecoder(k, placement, local, cfg, plan=plan)
        recovered[k] = decoder.decode(blocks)
        outputs[k] = run_reduce(k, local, recovered[k].values, available, fns)
        expected = oracle_output(cfg, dataset, fns, k, available)
        if not (outputs[k] == expected).all():
            mismatched.append(k)
    if mismatched:
        raise OutputMismatch(mismatched)

    counters = tally_uplink(messages, exclusive_sets, coded=coded) + tally_downlink(
        blocks,
        exclusive_sets,
        coded=coded,
        forwarding=access_point.forwarding,
    )
    histogram = replication_histogram(placement)
    report = measure_loads(counters, cfg, histogram)
    duration = time.perf_counter() - started

    metadata = run_metadata(cfg, placement)
    if trace_path is not None:
        count = write_trace(trace_path, messages, plan, blocks, header={"config": cfg.echo(), **metadata})
        logger.info("Wrote %d trace records to %s", count, trace_path)

    logger.info(
        "Verified %d users: L_u=%s L_d=%s (theory %s, %s) in %.3fs",
        placement.users,
        report.L_u,
        report.L_d,
        report.theory_L_u,
        report.theory_L_d,
        duration,
    )
    record = RunRecord(config=cfg, report=report, duration_s=duration, metadata=metadata)
    return SimulationResult(
        record=record,
        validated=validated,
        placement=placement,
        messages=messages,
        blocks=blocks,
        recovered=recovered,
        outputs=outputs,
    )
