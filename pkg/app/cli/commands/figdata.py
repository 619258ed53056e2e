"""`figdata`: CSV series behind the load and concentration figures."""
from __future__ import annotations

import argparse
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterator

from app.cli.rendering import write_csv
from app.core.config import settings
from app.core.errors import EXIT_OK, ConfigError
from app.core.validation import parse_int_list, parse_mu
from app.domain.placement.services import decentralized_placement, replication_histogram
from app.domain.system.schemas import PlacementMode, SystemConfig
from app.services.analytics import (
    concentration_density,
    theory_centralized,
    theory_decentralized,
    theory_uncoded,
)

logger = logging.getLogger(__name__)

FIGURES = ("fig2", "fig5", "fig6")
FIG2_COLUMNS = ["K", "mu", "coded_uplink", "coded_downlink", "uncoded"]
FIG5_COLUMNS = [
    "K",
    "mu",
    "centralized_uplink",
    "centralized_downlink",
    "decentralized_uplink",
    "decentralized_downlink",
    "decentralized_delta",
]
FIG6_COLUMNS = ["K", "j", "empirical", "binomial", "tv"]


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("figdata", help="emit figure data series as CSV files")
    parser.add_argument("--which", default=",".join(FIGURES), help="comma list of fig2, fig5, fig6")
    parser.add_argument("--out-dir", default="figdata", help="directory for the CSV files")
    parser.add_argument("--users", type=int, default=20, help="K for the load curves")
    parser.add_argument("--steps", type=int, default=4, help="mu points per 1/K interval")
    parser.add_argument("--mu", default="2/5", help="storage fraction of the concentration samples")
    parser.add_argument("--exponents", default="3:7", help="K = 2^e for these e")
    parser.add_argument("--files", type=int, default=100_000, help="files per concentration sample")
    parser.add_argument("--samples", type=int, default=1, help="placements per K")
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    parser.set_defaults(handler=execute)


def mu_grid(K: int, steps: int) -> list[Fraction]:
    """mu from 1/K to 1 in increments of 1/(steps*K)."""
    return [Fraction(i, steps * K) for i in range(steps, steps * K + 1)]


def fig2_rows(K: int, steps: int) -> Iterator[dict[str, Any]]:
    for mu in mu_grid(K, steps):
        uplink, downlink = theory_centralized(K, mu)
        yield {
            "K": K,
            "mu": mu,
            "coded_uplink": uplink,
            "coded_downlink": downlink,
            "uncoded": theory_uncoded(K, mu),
        }


def fig5_rows(K: int, steps: int) -> Iterator[dict[str, Any]]:
    for mu in mu_grid(K, steps):
        central_u, central_d = theory_centralized(K, mu)
        decentral_u, decentral_d, delta = theory_decentralized(K, mu)
        yield {
            "K": K,
            "mu": mu,
            "centralized_uplink": central_u,
            "centralized_downlink": central_d,
            "decentralized_uplink": decentral_u,
            "decentralized_downlink": decentral_d,
            "decentralized_delta": delta,
        }


def fig6_rows(
    exponents: list[int],
    mu: Fraction,
    files: int,
    samples: int,
    seed: int,
) -> Iterator[dict[str, Any]]:
    for exponent in exponents:
        K = 2**exponent
        histograms = []
        for sample in range(samples):
            cfg = SystemConfig(
                users=K,
                files=files,
                mu=mu,
                seed=seed + sample,
                placement_mode=PlacementMode.DECENTRALIZED,
            )
            histograms.append(replication_histogram(decentralized_placement(cfg)))
        density = concentration_density(histograms, K, mu)
        logger.info("K=%d: total variation to Binomial(%d, %s) is %.5f", K, K, mu, float(density.total_variation))
        for j in range(K + 1):
            yield {
                "K": K,
                "j": j,
                "empirical": density.empirical[j],
                "binomial": density.binomial[j],
                "tv": density.total_variation,
            }


def execute(args: argparse.Namespace) -> int:
    which = [item.strip().lower() for item in args.which.split(",") if item.strip()]
    unknown = sorted(set(which) - set(FIGURES))
    if unknown:
        raise ConfigError(f"Unknown figure(s): {', '.join(unknown)}")
    if args.users < 1 or args.steps < 1 or args.files < 1 or args.samples < 1:
        raise ConfigError("--users, --steps, --files and --samples must be positive")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in which:
        if name == "fig2":
            rows, columns = fig2_rows(args.users, args.steps), FIG2_COLUMNS
        elif name == "fig5":
            rows, columns = fig5_rows(args.users, args.steps), FIG5_COLUMNS
        else:
            rows = fig6_rows(parse_int_list(args.exponents), parse_mu(args.mu), args.files, args.samples, args.seed)
            columns = FIG6_COLUMNS
        path = out_dir / f"{name}.csv"
        with path.open("w", encoding="utf-8", newline="") as handle:
            count = write_csv(rows, columns, handle)
        print(f"{path}: {count} rows")
    return EXIT_OK
