"""Closed-form loads, lower bounds and the run-level load report.

Everything is exact rational arithmetic; floats appear only when a report
is rendered.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from app.core.errors import LostFilesPresent, MuOutOfRange
from app.domain.placement.models import Placement, ReplicationHistogram
from app.domain.placement.services import replication_histogram
from app.domain.system.schemas import Baseline, DownlinkMode, PlacementMode, SystemConfig
from app.services.accounting import BitCounters

Point = tuple[Fraction, Fraction]


def _check_mu(K: int, mu: Fraction) -> Fraction:
    mu = Fraction(mu)
    if K < 1 or mu < Fraction(1, K) or mu > 1:
        raise MuOutOfRange(f"mu={mu} outside [1/{K}, 1]")
    return mu


def _integer_point(K: int, t: int) -> Point:
    """(1/mu - 1, t/(t+1) (1/mu - 1)) at mu = t/K."""
    uplink = Fraction(K - t, t)
    return uplink, Fraction(K - t, t + 1)


def theory_centralized(K: int, mu: Fraction) -> Point:
    """Achievable (L_u, L_d), memory-shared between neighbouring integer points."""
    mu = _check_mu(K, mu)
    replication = mu * K
    if replication.denominator == 1:
        return _integer_point(K, int(replication))
    low, high = math.floor(replication), math.ceil(replication)
    alpha = high - replication
    low_u, low_d = _integer_point(K, low)
    high_u, high_d = _integer_point(K, high)
    return alpha * low_u + (1 - alpha) * high_u, alpha * low_d + (1 - alpha) * high_d


def theory_decentralized(K: int, mu: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    """Expected (L_u, L_d, information loss) of random independent placement."""
    mu = Fraction(mu)
    if mu <= 0 or mu > 1:
        raise MuOutOfRange(f"mu={mu} outside (0, 1]")
    uplink = Fraction(0)
    downlink = Fraction(0)
    for j in range(1, K):
        share = math.comb(K, j + 1) * mu**j * (1 - mu) ** (K - j)
        uplink += share * Fraction(j + 1, j)
        downlink += share
    return uplink, downlink, (1 - mu) ** K


def theory_uncoded(K: int, mu: Fraction, mode: PlacementMode = PlacementMode.CENTRALIZED) -> Fraction:
    """Load of sending every needed value raw; equal on uplink and downlink."""
    mu = Fraction(mu)
    if mode is PlacementMode.DECENTRALIZED:
        return K * (1 - mu) - K * (1 - mu) ** K
    return K * (1 - mu)


def _require_complete(h: ReplicationHistogram, available_only: bool) -> None:
    if h.unstored and not available_only:
        raise LostFilesPresent(
            f"{h.unstored} of {h.file_count} files are stored nowhere; pass available_only=True"
        )


def lower_bound_uplink(h: ReplicationHistogram, K: int, available_only: bool = False) -> Fraction:
    """sum_j (a^j / N) (K - j) / j over the files stored somewhere."""
    _require_complete(h, available_only)
    total = sum((Fraction(h[j] * (K - j), j) for j in range(1, len(h.counts))), Fraction(0))
    return total / h.file_count


def lower_bound_downlink(h: ReplicationHistogram, K: int, available_only: bool = False) -> Fraction:
    """sum_j (a^j / N) (K - j) / (j + 1) over the files stored somewhere."""
    _require_complete(h, available_only)
    total = sum((Fraction(h[j] * (K - j), j + 1) for j in range(1, len(h.counts))), Fraction(0))
    return total / h.file_count


def _lower_hull(points: Sequence[Point]) -> list[Point]:
    hull: list[Point] = []
    for point in sorted(points):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point if it lies on or above the chord
            if (x2 - x1) * (point[1] - y1) - (y2 - y1) * (point[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(point)
    return hull


def _interpolate(hull: Sequence[Point], x: Fraction) -> Fraction:
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= x <= x2:
            return y1 + (y2 - y1) * (x - x1) / (x2 - x1)
    return hull[-1][1] if x >= hull[-1][0] else hull[0][1]


def lower_bound_envelope(K: int, mu: Fraction) -> Point:
    """Lower convex envelope over mu in {1/K, ..., 1} of the integer-point loads."""
    mu = _check_mu(K, mu)
    uplink_points = []
    downlink_points = []
    for t in range(1, K + 1):
        u, d = _integer_point(K, t)
        uplink_points.append((Fraction(t, K), u))
        downlink_points.append((Fraction(t, K), d))
    return _interpolate(_lower_hull(uplink_points), mu), _interpolate(_lower_hull(downlink_points), mu)


def decentralized_bound(K: int, mu: Fraction, delta: Fraction) -> Point:
    """Bounds for a placement that lost a fraction ``delta`` of the files."""
    mu = Fraction(mu)
    delta = Fraction(delta)
    if not 0 <= delta < 1:
        raise ValueError(f"delta={delta} outside [0, 1)")
    kept = 1 - delta
    uplink = max(Fraction(0), (kept / mu - 1) * kept)
    downlink = max(Fraction(0), mu * K / (mu * K + kept) * (kept / mu - 1) * kept)
    return uplink, downlink


def decentralized_asymptotic_bound(mu: Fraction) -> Point:
    """Both bounds as K grows with vanishing information loss."""
    limit = 1 / Fraction(mu) - 1
    return limit, limit


@dataclass(frozen=True, slots=True)
class Concentration:
    users: int
    mu: Fraction
    empirical: tuple[Fraction, ...]
    binomial: tuple[Fraction, ...]
    total_variation: Fraction
    samples: int


def binomial_pmf(K: int, mu: Fraction) -> tuple[Fraction, ...]:
    mu = Fraction(mu)
    return tuple(math.comb(K, j) * mu**j * (1 - mu) ** (K - j) for j in range(K + 1))


def concentration_density(
    samples: Iterable[Union[Placement, ReplicationHistogram]],
    K: int,
    mu: Fraction,
) -> Concentration:
    """Pooled per-j file fractions of sampled placements next to Binomial(K, mu)."""
    pooled = [0] * (K + 1)
    count = 0
    for sample in samples:
        h = sample if isinstance(sample, ReplicationHistogram) else replication_histogram(sample)
        if h.users != K:
            raise ValueError(f"histogram over {h.users} users, expected {K}")
        for j, a in enumerate(h.counts):
            pooled[j] += a
        count += 1
    total = sum(pooled)
    if total == 0:
        raise ValueError("no files in the sampled placements")
    empirical = tuple(Fraction(a, total) for a in pooled)
    binomial = binomial_pmf(K, mu)
    distance = sum((abs(e - b) for e, b in zip(empirical, binomial)), Fraction(0)) / 2
    return Concentration(
        users=K,
        mu=Fraction(mu),
        empirical=empirical,
        binomial=binomial,
        total_variation=distance,
        samples=count,
    )


@dataclass(frozen=True, slots=True)
class LoadReport:
    """Measured bit counts next to the closed forms for the same scenario.

    Padding is everything above the ideal count. It splits into alignment
    (ceiling split into segments, byte-aligned blocks) and skew (shorter
    constituents zero-padded to the longest one of their message).
    """

    uplink_bits: int
    downlink_bits: int
    padding_bits_up: Fraction
    padding_bits_down: Fraction
    alignment_bits_up: Fraction
    alignment_bits_down: Fraction
    skew_bits_up: Fraction
    skew_bits_down: Fraction
    L_u: Fraction
    L_d: Fraction
    theory_L_u: Fraction
    theory_L_d: Fraction
    bound_L_u: Fraction
    bound_L_d: Fraction
    placement_bound_L_u: Fraction
    placement_bound_L_d: Fraction
    delta: Fraction
    delta_theory: Fraction
    retry_count: int
    uplink_messages: int
    downlink_blocks: int

    @property
    def padding_bits(self) -> Fraction:
        return self.padding_bits_up + self.padding_bits_down


def theory_for(cfg: SystemConfig) -> tuple[Fraction, Fraction, Fraction]:
    """(L_u, L_d, delta) the configured scheme should achieve."""
    K, mu = cfg.users, cfg.mu
    if cfg.placement_mode is PlacementMode.DECENTRALIZED:
        uplink, downlink, delta = theory_decentralized(K, mu)
    else:
        uplink, downlink = theory_centralized(K, mu)
        delta = Fraction(0)
    if cfg.baseline is Baseline.UNCODED:
        uncoded = theory_uncoded(K, mu, cfg.placement_mode)
        return uncoded, uncoded, delta
    if cfg.downlink_mode is DownlinkMode.FORWARD:
        return uplink, uplink, delta
    return uplink, downlink, delta


def bounds_for(cfg: SystemConfig, delta: Fraction) -> Point:
    if cfg.placement_mode is PlacementMode.DECENTRALIZED:
        return decentralized_bound(cfg.users, cfg.mu, delta)
    return lower_bound_envelope(cfg.users, cfg.mu)


def measure_loads(counters: BitCounters, cfg: SystemConfig, histogram: ReplicationHistogram) -> LoadReport:
    """Normalize exact bit counts by N*T and attach theory and bounds."""
    scale = cfg.files * cfg.value_bits
    K = cfg.users
    delta = Fraction(histogram.unstored, histogram.file_count)
    theory_u, theory_d, delta_theory = theory_for(cfg)
    bound_u, bound_d = bounds_for(cfg, delta)
    return LoadReport(
        uplink_bits=counters.uplink_bits,
        downlink_bits=counters.downlink_bits,
        padding_bits_up=counters.uplink_bits - counters.ideal_uplink_bits,
        padding_bits_down=counters.downlink_bits - counters.ideal_downlink_bits,
        alignment_bits_up=counters.balanced_uplink_bits - counters.ideal_uplink_bits,
        alignment_bits_down=counters.byte_padding_bits
        + counters.balanced_downlink_bits
        - counters.ideal_downlink_bits,
        skew_bits_up=counters.uplink_bits - counters.balanced_uplink_bits,
        skew_bits_down=counters.downlink_bits
        - counters.byte_padding_bits
        - counters.balanced_downlink_bits,
        L_u=Fraction(counters.uplink_bits, scale),
        L_d=Fraction(counters.downlink_bits, scale),
        theory_L_u=theory_u,
        theory_L_d=theory_d,
        bound_L_u=bound_u,
        bound_L_d=bound_d,
        placement_bound_L_u=lower_bound_uplink(histogram, K, available_only=True),
        placement_bound_L_d=lower_bound_downlink(histogram, K, available_only=True),
        delta=delta,
        delta_theory=delta_theory,
        retry_count=counters.retries,
        uplink_messages=counters.uplink_messages,
        downlink_blocks=counters.downlink_blocks,
    )
