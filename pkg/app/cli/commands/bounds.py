"""`bounds`: closed-form loads and lower bounds, optionally for a given placement."""
from __future__ import annotations

import argparse
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from app.cli.rendering import render_bounds
from app.core.errors import EXIT_OK, ConfigError, ConfigFileError
from app.core.validation import parse_int_list, parse_mu
from app.domain.placement.models import ReplicationHistogram
from app.domain.placement.services import information_loss, load_placement, replication_histogram
from app.domain.system.schemas import PlacementMode
from app.services.analytics import (
    decentralized_asymptotic_bound,
    decentralized_bound,
    lower_bound_downlink,
    lower_bound_envelope,
    lower_bound_uplink,
    theory_centralized,
    theory_decentralized,
    theory_uncoded,
)


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("bounds", help="print theoretical loads and lower bounds")
    parser.add_argument("--users", type=int, help="number of users K")
    parser.add_argument("--mu", help='storage fraction, "p/q" or decimal')
    parser.add_argument("--placement", help="placement dump (one line of file indices per user)")
    parser.add_argument("--histogram", help="replication counts a^0,a^1,...,a^K")
    parser.set_defaults(handler=execute)


def _histogram(args: argparse.Namespace) -> Optional[ReplicationHistogram]:
    if args.placement:
        path = Path(args.placement)
        if not path.is_file():
            raise ConfigFileError(f"Placement file not found: {path}")
        return replication_histogram(load_placement(path.read_text(encoding="utf-8")))
    if args.histogram:
        counts = parse_int_list(args.histogram)
        if len(counts) < 2 or any(count < 0 for count in counts) or sum(counts) == 0:
            raise ConfigError(f"Invalid histogram '{args.histogram}'")
        return ReplicationHistogram(counts=tuple(counts))
    return None


def _scheme_sections(K: int, mu: Fraction) -> list[tuple[str, list[tuple[str, Any]]]]:
    central_u, central_d = theory_centralized(K, mu)
    bound_u, bound_d = lower_bound_envelope(K, mu)
    decentral_u, decentral_d, delta = theory_decentralized(K, mu)
    loss_u, loss_d = decentralized_bound(K, mu, delta)
    limit_u, limit_d = decentralized_asymptotic_bound(mu)
    return [
        (
            "Centralized placement",
            [
                ("coded uplink L_u", central_u),
                ("coded downlink L_d", central_d),
                ("uncoded L_u = L_d", theory_uncoded(K, mu)),
                ("lower bound L_u", bound_u),
                ("lower bound L_d", bound_d),
            ],
        ),
        (
            "Decentralized placement",
            [
                ("coded uplink L_u", decentral_u),
                ("coded downlink L_d", decentral_d),
                ("uncoded L_u = L_d", theory_uncoded(K, mu, PlacementMode.DECENTRALIZED)),
                ("information loss", delta),
                ("lower bound L_u", loss_u),
                ("lower bound L_d", loss_d),
                ("large-K limit of both bounds", limit_u),
            ],
        ),
    ]


def _placement_section(h: ReplicationHistogram) -> tuple[str, list[tuple[str, Any]]]:
    K = h.users
    lossy = h.unstored > 0
    rows: list[tuple[str, Any]] = [
        ("users", Fraction(K)),
        ("files", Fraction(h.file_count)),
        ("information loss", information_loss(h)),
        ("uplink lower bound", lower_bound_uplink(h, K, available_only=lossy)),
        ("downlink lower bound", lower_bound_downlink(h, K, available_only=lossy)),
    ]
    if lossy:
        rows.append(("note", "bounds cover the stored files only"))
    return "Given placement", rows


def execute(args: argparse.Namespace) -> int:
    histogram = _histogram(args)
    if args.users is None and args.mu is None and histogram is None:
        raise ConfigError("give --users and --mu, a --placement file or a --histogram")

    sections: list[tuple[str, list[tuple[str, Any]]]] = []
    title = "Bounds"
    if args.users is not None or args.mu is not None:
        if args.users is None or args.mu is None:
            raise ConfigError("--users and --mu go together")
        mu = parse_mu(args.mu)
        title = f"Bounds for K={args.users}, mu={mu}"
        sections.extend(_scheme_sections(args.users, mu))
    if histogram is not None:
        sections.append(_placement_section(histogram))

    print(render_bounds(title, sections), end="")
    return EXIT_OK
