from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import OutputMismatch, SimulationLimitExceeded
from app.domain.system.models import ComputeFunctions
from app.domain.system.schemas import SystemConfig
from app.domain.system.services import default_compute_functions
from app.services.analytics import theory_decentralized
from app.services.simulation import check_simulation_limits, run_simulation

F = Fraction


def _centralized(K: int, t: int, **extra) -> SystemConfig:
    return SystemConfig(users=K, files=math.comb(K, t), mu=F(t, K), value_bits=8 * t, **extra)


def _integer_grid(max_users: int):
    return [(K, t) for K in range(2, max_users + 1) for t in range(1, K + 1)]


def _shuffle_bits(placement, value_bits: int) -> tuple[int, int]:
    """Uplink and downlink bits counted straight from who stores which file.

    Each sender pads its message to its longest segment; each subset sends
    |S| - 1 byte-aligned blocks as long as its longest message.
    """
    sharing = Counter()
    for column in placement.incidence().T:
        owners = tuple(int(k) + 1 for k in np.flatnonzero(column))
        if 0 < len(owners) < placement.users:
            sharing[owners] += 1
    segments: dict[tuple[int, ...], dict[int, int]] = defaultdict(dict)
    for owners, count in sharing.items():
        for target in set(placement.all_users) - set(owners):
            subset = tuple(sorted((*owners, target)))
            segments[subset][target] = -(-count * value_bits // len(owners))
    uplink = sum(
        max(lengths.get(k, 0) for k in subset if k != sender)
        for subset, lengths in segments.items()
        for sender in subset
    )
    downlink = sum((len(subset) - 1) * 8 * -(-max(lengths.values()) // 8) for subset, lengths in segments.items())
    return uplink, downlink


def _assert_padding_splits(report) -> None:
    assert report.alignment_bits_up + report.skew_bits_up == report.padding_bits_up
    assert report.alignment_bits_down + report.skew_bits_down == report.padding_bits_down
    assert min(report.alignment_bits_up, report.alignment_bits_down) >= 0
    assert min(report.skew_bits_up, report.skew_bits_down) >= 0


def test_golden_run(golden_config):
    result = run_simulation(golden_config)
    report = result.record.report
    assert report.L_u == F(1, 2)
    assert report.L_d == F(1, 3)
    assert report.uplink_messages == 3
    assert report.downlink_blocks == 2
    assert report.padding_bits == 0
    assert result.record.verified
    assert set(result.outputs) == {1, 2, 3}
    assert result.record.metadata["hash_primitive"] == "blake2b"
    assert result.record.metadata["field_polynomial"] == "0x11d"


def test_golden_uncoded_baseline(make_config):
    report = run_simulation(make_config(baseline="uncoded")).record.report
    assert report.L_u == 1
    assert report.L_d == 1
    assert report.uplink_messages == 3
    assert report.downlink_blocks == 3


def test_golden_forwarding(make_config):
    report = run_simulation(make_config(downlink_mode="forward")).record.report
    assert report.L_u == report.L_d == F(1, 2)
    assert report.theory_L_d == F(1, 2)
    assert report.padding_bits == 0


def test_forwarding_counts_blocks_like_messages(make_config):
    cfg = make_config(users=5, files=12, mu="2/5", value_bits=8, placement_mode="decentralized", downlink_mode="forward")
    result = run_simulation(cfg)
    report = result.record.report
    assert len(result.blocks) == len(result.messages)
    assert report.downlink_blocks == report.uplink_messages
    assert report.uplink_messages == sum(1 for message in result.messages if message.bit_length)
    assert report.downlink_bits == report.uplink_bits
    assert report.skew_bits_down == report.skew_bits_up
    _assert_padding_splits(report)


@pytest.mark.parametrize("K, t", _integer_grid(7))
def test_integer_replication_loads_are_exact(K, t):
    report = run_simulation(_centralized(K, t)).record.report
    assert (report.L_u, report.L_d) == (F(K - t, t), F(K - t, t + 1))
    assert (report.L_u, report.L_d) == (report.theory_L_u, report.theory_L_d)
    # the run's own placement meets its lower bounds with equality
    assert (report.L_u, report.L_d) == (report.placement_bound_L_u, report.placement_bound_L_d)
    assert report.padding_bits == 0


@pytest.mark.slow
@pytest.mark.parametrize("K, t", [(K, t) for K, t in _integer_grid(10) if K > 7])
def test_integer_replication_loads_are_exact_up_to_ten_users(K, t):
    report = run_simulation(_centralized(K, t)).record.report
    assert (report.L_u, report.L_d) == (F(K - t, t), F(K - t, t + 1))
    assert (report.L_u, report.L_d) == (report.placement_bound_L_u, report.placement_bound_L_d)


@pytest.mark.parametrize("K, t", [(K, t) for K, t in _integer_grid(6) if t < K])
def test_uncoded_baseline_and_coded_gains(K, t):
    uncoded = run_simulation(_centralized(K, t, baseline="uncoded")).record.report
    coded = run_simulation(_centralized(K, t)).record.report
    assert uncoded.L_u == uncoded.L_d == K - t
    assert uncoded.L_u / coded.L_u == t
    assert uncoded.L_d / coded.L_d == t + 1


def test_memory_sharing_loads(make_config):
    report = run_simulation(make_config(users=4, files=48, mu="3/8", value_bits=16)).record.report
    assert (report.L_u, report.L_d) == (F(2), F(13, 12))
    assert (report.theory_L_u, report.theory_L_d) == (F(2), F(13, 12))
    assert report.padding_bits == 0
    assert report.skew_bits_up == report.skew_bits_down == 0


@pytest.mark.parametrize("value_bits", [5, 13, 33])
def test_padding_explains_the_gap_to_theory(make_config, value_bits):
    cfg = make_config(value_bits=value_bits)
    report = run_simulation(cfg).record.report
    scale = cfg.files * cfg.value_bits
    assert report.L_u - report.theory_L_u == report.padding_bits_up / scale
    assert report.L_d - report.theory_L_d == report.padding_bits_down / scale
    assert report.padding_bits_down > 0
    _assert_padding_splits(report)
    assert report.skew_bits_up == report.skew_bits_down == 0
    assert report.alignment_bits_down == report.padding_bits_down


def test_random_downlink_matrices(make_config):
    result = run_simulation(make_config(users=5, files=10, mu="2/5", downlink_mode="random"))
    assert result.record.report.L_d == F(1)
    assert result.record.metadata["downlink_matrix"] == "random"


def test_decentralized_small_run(make_config):
    cfg = make_config(users=4, files=400, mu="1/2", value_bits=16, placement_mode="decentralized")
    result = run_simulation(cfg)
    report = result.record.report
    scale = cfg.files * cfg.value_bits
    assert (report.uplink_bits, report.downlink_bits) == _shuffle_bits(result.placement, cfg.value_bits)
    _assert_padding_splits(report)
    assert report.skew_bits_up > 0
    # stripping all padding leaves exactly the placement's own lower bound
    assert report.L_u - report.padding_bits_up / scale == report.placement_bound_L_u
    assert report.L_d - report.padding_bits_down / scale == report.placement_bound_L_d
    assert abs(report.delta - F(1, 16)) < F(1, 20)
    assert report.delta_theory == F(1, 16)


@pytest.mark.parametrize("value_bits", [3, 8, 13])
def test_decentralized_bits_match_an_independent_count(make_config, value_bits):
    cfg = make_config(users=5, files=60, mu="2/5", value_bits=value_bits, placement_mode="decentralized")
    result = run_simulation(cfg)
    report = result.record.report
    assert (report.uplink_bits, report.downlink_bits) == _shuffle_bits(result.placement, value_bits)
    _assert_padding_splits(report)


def test_decentralized_with_population(make_config):
    cfg = make_config(users=4, files=60, mu="1/2", placement_mode="decentralized", population=9)
    result = run_simulation(cfg)
    assert len(result.record.metadata["participant_labels"]) == 4
    assert result.record.verified


def _random_config(seed: int) -> SystemConfig:
    rng = np.random.default_rng([seed, 2024])
    K = int(rng.integers(2, 7))
    value_bits = int(rng.choice([3, 8, 12, 40]))
    downlink = ("mds", "random")[seed % 2]
    if seed % 4 < 2:
        t = int(rng.integers(1, K + 1))
        files = math.comb(K, t) * int(rng.integers(1, 3))
        return SystemConfig(
            users=K, files=files, mu=F(t, K), value_bits=value_bits, seed=seed, downlink_mode=downlink
        )
    return SystemConfig(
        users=K,
        files=int(rng.integers(K, 40)),
        mu=F(int(rng.integers(1, K + 1)), K),
        value_bits=value_bits,
        seed=seed,
        placement_mode="decentralized",
        downlink_mode=downlink,
    )


@pytest.mark.parametrize("seed", range(100))
def test_outputs_match_single_node_reference(seed):
    cfg = _random_config(seed)
    result = run_simulation(cfg)
    assert result.record.verified
    assert len(result.outputs) == cfg.users
    _assert_padding_splits(result.record.report)


def test_wrong_reduce_is_caught(golden_config):
    reference = default_compute_functions(golden_config)
    calls = {"count": 0}

    def flaky_reduce(values):
        calls["count"] += 1
        output = reference.reduce(values).copy()
        # corrupt only the distributed result for user 2, not its reference
        if calls["count"] == 3:
            output[0] ^= 1
        return output

    fns = ComputeFunctions(
        map=reference.map,
        reduce=flaky_reduce,
        value_bits=reference.value_bits,
        output_bits=reference.output_bits,
        hash_id=reference.hash_id,
    )
    with pytest.raises(OutputMismatch) as excinfo:
        run_simulation(golden_config, fns=fns)
    assert excinfo.value.users == [2]
    assert excinfo.value.exit_code == 3


def test_reruns_are_bit_identical(make_config):
    cfg = make_config(users=4, files=30, mu="1/2", value_bits=12, placement_mode="decentralized", downlink_mode="random")
    first = run_simulation(cfg)
    second = run_simulation(cfg)
    assert first.record.report == second.record.report
    assert all(np.array_equal(a.payload, b.payload) for a, b in zip(first.blocks, second.blocks))


def test_trace_lines(golden_config, tmp_path):
    path = tmp_path / "trace.jsonl"
    run_simulation(golden_config, trace_path=path)
    records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
    assert [r["kind"] for r in records] == ["run", "uplink", "uplink", "uplink", "downlink", "downlink"]
    assert records[0]["config"]["mu"] == "2/3"
    assert records[1] == {"bits": 64, "kind": "uplink", "padded_bits": 0, "sender": 1, "subset": [1, 2, 3]}
    assert len(records[-1]["coefficients"]) == 3


def test_simulation_limits(make_config):
    with pytest.raises(SimulationLimitExceeded):
        check_simulation_limits(make_config(users=15, files=15, mu="1/15"))
    with pytest.raises(SimulationLimitExceeded):
        check_simulation_limits(make_config(users=13, files=100, mu="1/2", placement_mode="decentralized"))
    check_simulation_limits(make_config())


@pytest.mark.slow
def test_decentralized_convergence_k12():
    K, mu, N = 12, F(2, 5), 10_000
    uplink, downlink, delta = theory_decentralized(K, mu)
    raw_up, raw_down, stripped_up, stripped_down = [], [], [], []
    for seed in range(5):
        cfg = SystemConfig(users=K, files=N, mu=mu, value_bits=8, seed=seed, placement_mode="decentralized")
        result = run_simulation(cfg)
        report = result.record.report
        scale = N * cfg.value_bits
        assert (report.uplink_bits, report.downlink_bits) == _shuffle_bits(result.placement, cfg.value_bits)
        _assert_padding_splits(report)
        assert abs(report.delta - delta) <= F(5, 1000)
        assert report.L_u >= report.bound_L_u
        assert report.L_d >= report.bound_L_d
        raw_up.append(report.L_u)
        raw_down.append(report.L_d)
        stripped_up.append(report.L_u - report.padding_bits_up / scale)
        stripped_down.append(report.L_d - report.padding_bits_down / scale)
    # the placement itself converges to the expected loads
    assert abs(float(sum(stripped_up) / 5 / uplink) - 1) < 0.02
    assert abs(float(sum(stripped_down) / 5 / downlink) - 1) < 0.02
    # zero padding to the longest constituent keeps raw loads well above them at N=10^4
    assert 1.4 < float(sum(raw_up) / 5 / uplink) < 1.7
    assert 2.0 < float(sum(raw_down) / 5 / downlink) < 2.45
