"""`run`: one fully simulated and verified scenario."""
from __future__ import annotations

import argparse
import logging

from app.cli.options import add_scenario_arguments, build_config, scenario_values
from app.cli.rendering import RUN_COLUMNS, record_row, render_report, write_csv
from app.core.errors import EXIT_OK
from app.services.simulation import check_simulation_limits, run_simulation

logger = logging.getLogger(__name__)


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("run", help="simulate one scenario bit by bit")
    add_scenario_arguments(parser)
    parser.add_argument("--trace", help="write a JSON-lines message trace to this path")
    parser.add_argument("--out", help="write the run as a one-row CSV to this path")
    parser.set_defaults(handler=execute)


def execute(args: argparse.Namespace) -> int:
    cfg = build_config(scenario_values(args))
    check_simulation_limits(cfg)
    result = run_simulation(cfg, trace_path=args.trace)

    print(render_report(result.record), end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            write_csv([record_row(result.record)], RUN_COLUMNS, handle)
        logger.info("Wrote run row to %s", args.out)
    return EXIT_OK
