"""Shufflecast command line: simulate, sweep and bound coded wireless MapReduce."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from app.cli.commands import bounds, figdata, run, sweep
from app.core.config import settings
from app.core.errors import EXIT_CONFIG, DivisibilityViolation, ShufflecastError
from app.core.logging_config import setup_logging

logger = logging.getLogger("shufflecast")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shufflecast",
        description=f"{settings.APP_NAME} {settings.CODE_VERSION}: coded Map-Shuffle-Reduce over a wireless access point",
    )
    parser.add_argument("--log-level", help="override LOG_LEVEL for this invocation")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (run, sweep, bounds, figdata):
        command.add_parser(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)

    setup_logging(args.log_level)

    try:
        return args.handler(args)
    except DivisibilityViolation as exc:
        message = f"error: {exc.detail}"
        if exc.suggested_files:
            message += f" (try --files {exc.suggested_files})"
        print(message, file=sys.stderr)
        return exc.exit_code
    except ShufflecastError as exc:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
