"""CSV rows and Jinja2 text reports for the command line."""
from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, TextIO

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.core.config import settings
from app.services.simulation import RunRecord

TEMPLATES_DIR = Path(__file__).resolve().parent / "templates"

RUN_COLUMNS = [
    "K",
    "N",
    "mu",
    "mode",
    "baseline",
    "L_u_meas",
    "L_d_meas",
    "L_u_theory",
    "L_d_theory",
    "L_u_bound",
    "L_d_bound",
    "delta_meas",
    "delta_theory",
    "uplink_bits",
    "downlink_bits",
    "padding_bits",
    "alignment_bits",
    "skew_bits",
    "seed",
    "analytic",
    "status",
    "downlink",
    "duration_s",
]


def format_number(value: Any) -> str:
    """Integers verbatim, everything numeric else with FLOAT_DIGITS significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (Fraction, float)):
        return f"{float(value):.{settings.FLOAT_DIGITS}g}"
    return str(value)


def format_exact(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value} ({format_number(value)})"


_environment: Optional[Environment] = None


def _templates() -> Environment:
    global _environment
    if _environment is None:
        _environment = Environment(
            loader=FileSystemLoader(str(TEMPLATES_DIR)),
            autoescape=False,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
            undefined=StrictUndefined,
        )
        _environment.filters["num"] = format_number
        _environment.filters["exact"] = format_exact
    return _environment


def record_row(record: RunRecord) -> dict[str, str]:
    cfg = record.config
    report = record.report
    row: dict[str, Any] = {
        "K": cfg.users,
        "N": cfg.files,
        "mu": cfg.mu,
        "mode": cfg.placement_mode.value,
        "baseline": cfg.baseline.value,
        "L_u_meas": report.L_u,
        "L_d_meas": report.L_d,
        "L_u_theory": report.theory_L_u,
        "L_d_theory": report.theory_L_d,
        "L_u_bound": report.bound_L_u,
        "L_d_bound": report.bound_L_d,
        "delta_meas": report.delta,
        "delta_theory": report.delta_theory,
        "uplink_bits": report.uplink_bits,
        "downlink_bits": report.downlink_bits,
        "padding_bits": report.padding_bits,
        "alignment_bits": report.alignment_bits_up + report.alignment_bits_down,
        "skew_bits": report.skew_bits_up + report.skew_bits_down,
        "seed": cfg.seed,
        "analytic": False,
        "status": "ok" if record.verified else "mismatch",
        "downlink": cfg.downlink_mode.value,
        "duration_s": f"{record.duration_s:.3f}",
    }
    return {key: format_number(value) for key, value in row.items()}


def write_csv(rows: Iterable[dict[str, Any]], columns: Sequence[str], target: TextIO) -> int:
    writer = csv.DictWriter(target, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    count = 0
    for row in rows:
        writer.writerow({key: value if isinstance(value, str) else format_number(value) for key, value in row.items()})
        count += 1
    return count


def render_report(record: RunRecord) -> str:
    return _templates().get_template("report.txt.j2").render(
        app_name=settings.APP_NAME,
        config=record.config.echo(),
        report=record.report,
        duration=record.duration_s,
        metadata=record.metadata,
        verified=record.verified,
    )


def render_bounds(title: str, sections: Sequence[tuple[str, Sequence[tuple[str, Any]]]]) -> str:
    return _templates().get_template("bounds.txt.j2").render(title=title, sections=sections)
