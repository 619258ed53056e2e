"""`sweep`: a CSV row per grid point, simulated where tractable."""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator, Optional

from app.cli.options import add_scenario_arguments, build_config, scenario_values
from app.cli.rendering import RUN_COLUMNS, record_row, write_csv
from app.core.config import settings
from app.core.errors import EXIT_OK, ConfigError, ShufflecastError, SimulationLimitExceeded
from app.core.validation import parse_int_list, parse_mu_list
from app.domain.placement.services import suggest_file_count
from app.domain.system.schemas import Baseline, PlacementMode, SystemConfig
from app.services.analytics import bounds_for, theory_for
from app.services.simulation import check_simulation_limits, run_simulation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepPoint:
    config: SystemConfig
    analytic: bool


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("sweep", help="evaluate a grid of scenarios as CSV")
    add_scenario_arguments(parser, lists=True)
    parser.add_argument("--analytic", action="store_true", help="closed forms only, no simulation")
    parser.add_argument("--jobs", type=int, default=1, help="grid points evaluated in parallel")
    parser.add_argument("--out", help="CSV path (default: stdout)")
    parser.set_defaults(handler=execute)


def _split(value: Any, default: list[str]) -> list[str]:
    if value in (None, ""):
        return default
    return [part.strip().lower() for part in str(value).split(",") if part.strip()]


def _mu_grid(value: Any, K: int) -> list[Fraction]:
    if value in (None, "", "all"):
        return [Fraction(t, K) for t in range(1, K + 1)]
    return parse_mu_list(value)


def _file_count(K: int, mu: Fraction, mode: PlacementMode, requested: Optional[int]) -> int:
    if mode is PlacementMode.DECENTRALIZED:
        return requested or settings.SWEEP_DECENTRALIZED_FILES
    replication = mu * K
    if replication < 1 or replication > K:
        return requested or 1
    return suggest_file_count(K, mu, requested or 1)


def grid_points(args: argparse.Namespace) -> Iterator[SweepPoint]:
    """Grid in the order rows are emitted: K, mode, mu, baseline."""
    values = scenario_values(args)
    users = parse_int_list(values.pop("users", None))
    if not users:
        raise ConfigError("--users is required")
    try:
        modes = [PlacementMode(mode) for mode in _split(values.pop("mode", None), ["centralized"])]
        baselines = [Baseline(item) for item in _split(values.pop("baseline", None), ["coded"])]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    mu_text = values.pop("mu", None)
    requested = values.pop("files", None)
    requested = int(requested) if requested not in (None, "") else None

    for K in users:
        for mode in modes:
            for mu in _mu_grid(mu_text, K):
                for baseline in baselines:
                    cfg = build_config(
                        values,
                        users=K,
                        files=_file_count(K, mu, mode, requested),
                        mu=mu,
                        mode=mode.value,
                        baseline=baseline.value,
                    )
                    yield SweepPoint(config=cfg, analytic=args.analytic)


def analytic_row(cfg: SystemConfig) -> dict[str, Any]:
    theory_u, theory_d, delta = theory_for(cfg)
    bound_u, bound_d = bounds_for(cfg, delta)
    row: dict[str, Any] = {column: "" for column in RUN_COLUMNS}
    row.update(
        K=cfg.users,
        N=cfg.files,
        mu=cfg.mu,
        mode=cfg.placement_mode.value,
        baseline=cfg.baseline.value,
        L_u_theory=theory_u,
        L_d_theory=theory_d,
        L_u_bound=bound_u,
        L_d_bound=bound_d,
        delta_theory=delta,
        seed=cfg.seed,
        analytic=True,
        status="analytic",
        downlink=cfg.downlink_mode.value,
    )
    return row


def evaluate_point(point: SweepPoint) -> dict[str, Any]:
    cfg = point.config
    try:
        if point.analytic:
            return analytic_row(cfg)
        try:
            check_simulation_limits(cfg)
        except SimulationLimitExceeded as exc:
            logger.warning("Falling back to closed forms: %s", exc.detail)
            return analytic_row(cfg)
        return record_row(run_simulation(cfg).record)
    except ShufflecastError as exc:
        logger.exception("Sweep point K=%d mu=%s failed", cfg.users, cfg.mu)
        row: dict[str, Any] = {column: "" for column in RUN_COLUMNS}
        row.update(
            K=cfg.users,
            N=cfg.files,
            mu=cfg.mu,
            mode=cfg.placement_mode.value,
            baseline=cfg.baseline.value,
            seed=cfg.seed,
            analytic=False,
            status=f"error:{type(exc).__name__}",
            downlink=cfg.downlink_mode.value,
        )
        return row


def execute(args: argparse.Namespace) -> int:
    points = list(grid_points(args))
    logger.info("Sweeping %d grid points with %d job(s)", len(points), max(args.jobs, 1))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(evaluate_point, points))
    else:
        rows = [evaluate_point(point) for point in points]

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            write_csv(rows, RUN_COLUMNS, handle)
        logger.info("Wrote %d rows to %s", len(rows), args.out)
    else:
        write_csv(rows, RUN_COLUMNS, sys.stdout)

    failed = [row for row in rows if str(row.get("status", "")).startswith("error")]
    if failed:
        logger.warning("%d of %d grid points failed", len(failed), len(rows))
    return EXIT_OK
