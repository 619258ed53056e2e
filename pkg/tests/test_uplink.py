from __future__ import annotations

import numpy as np
import pytest

from app.core.bits import xor_bits
from app.domain.compute.services import run_map
from app.domain.placement.services import build_placement
from app.domain.system.services import default_compute_functions, synthesize_dataset, validate_config
from app.domain.uplink.models import ExclusiveSet
from app.domain.uplink.services import (
    build_exclusive_sets,
    encode_centralized_uplink,
    encode_decentralized_uplink,
    encode_uncoded_uplink,
    owner_groups,
    plan_uplink,
    segment_split,
)


def _prepare(cfg):
    placement = build_placement(validate_config(cfg))
    map_output = run_map(placement, synthesize_dataset(cfg), default_compute_functions(cfg))
    return placement, map_output


def test_owner_groups_golden(golden_setup):
    _, placement, _, _, _ = golden_setup
    assert owner_groups(placement) == {(1, 2): (1, 2), (1, 3): (3, 4), (2, 3): (5, 6)}
    assert owner_groups(placement, participants=[1]) == {(1,): (1, 2, 3, 4)}


def test_exclusive_sets_golden(golden_setup):
    _, placement, _, _, map_output = golden_setup
    sets = build_exclusive_sets(placement, map_output)
    assert [(es.target, es.owners, es.files) for es in sets] == [
        (1, (2, 3), (5, 6)),
        (2, (1, 3), (3, 4)),
        (3, (1, 2), (1, 2)),
    ]
    for es in sets:
        assert es.subset == (1, 2, 3)
        assert es.payload_bits == 128
        owner = map_output.local(es.owners[0])
        assert np.array_equal(es.payload, owner.concat(es.target, es.files))


def test_segment_split_is_a_ceiling_split():
    payload = np.arange(10, dtype=np.uint8) % 2
    es = ExclusiveSet(target=4, owners=(1, 2, 3), files=(7, 8), value_bits=5, payload=payload)
    segments = segment_split(es, (3, 1, 2))
    assert [s.sender for s in segments] == [1, 2, 3]
    assert [s.start for s in segments] == [0, 4, 8]
    assert [s.payload_bits for s in segments] == [4, 4, 2]
    assert {s.padded_bits for s in segments} == {4}
    assert segments[2].padding_bits == 2
    assert np.array_equal(np.concatenate([s.payload for s in segments]), payload)


def test_segment_split_with_more_owners_than_bits():
    es = ExclusiveSet(target=1, owners=(2, 3, 4), files=(1,), value_bits=1, payload=np.ones(1, dtype=np.uint8))
    segments = segment_split(es, es.owners)
    assert [s.payload_bits for s in segments] == [1, 0, 0]
    assert [s.padded_bits for s in segments] == [1, 1, 1]
    with pytest.raises(ValueError):
        segment_split(es, (2, 3))


def test_centralized_uplink_golden(golden_setup):
    cfg, placement, _, _, map_output = golden_setup
    sets = build_exclusive_sets(placement, map_output)
    messages = encode_centralized_uplink(sets, cfg)
    assert [(m.sender, m.subset) for m in messages] == [(1, (1, 2, 3)), (2, (1, 2, 3)), (3, (1, 2, 3))]
    assert [m.bit_length for m in messages] == [64, 64, 64]

    by_target = {es.target: es for es in sets}
    # user 1 XORs its halves of the sets for users 2 and 3
    first = messages[0]
    assert [seg.target for seg in plan_uplink(placement, cfg.value_bits).messages[0].constituents] == [2, 3]
    expected = xor_bits([by_target[2].payload[:64], by_target[3].payload[:64]])
    assert np.array_equal(first.payload, expected)
    # user 3 sends the second halves of the sets for users 1 and 2
    last = messages[2]
    expected = xor_bits([by_target[1].payload[64:], by_target[2].payload[64:]])
    assert np.array_equal(last.payload, expected)


def test_uncoded_uplink_golden(golden_setup):
    _, placement, _, _, map_output = golden_setup
    sets = build_exclusive_sets(placement, map_output)
    messages = encode_uncoded_uplink(sets)
    assert [(m.sender, m.bit_length) for m in messages] == [(2, 128), (1, 128), (1, 128)]
    assert all(np.array_equal(m.payload, es.payload) for m, es in zip(messages, sets))


def test_centralized_uplink_covers_every_subset(make_config):
    cfg = make_config(users=5, files=10, mu="2/5", value_bits=16)
    placement, map_output = _prepare(cfg)
    sets = build_exclusive_sets(placement, map_output)
    messages = encode_centralized_uplink(sets, cfg)
    # C(5, 3) subsets, one message per member
    assert len(messages) == 10 * 3
    assert all(m.bit_length == 8 for m in messages)
    assert all(len(p.constituents) == 2 for p in plan_uplink(placement, cfg.value_bits).messages)


def test_memory_sharing_uplink_uses_both_levels(make_config):
    cfg = make_config(users=4, files=48, mu="3/8", value_bits=8)
    placement, map_output = _prepare(cfg)
    messages = encode_centralized_uplink(build_exclusive_sets(placement, map_output), cfg)
    sizes = sorted({len(m.subset) for m in messages})
    assert sizes == [2, 3]
    assert sum(m.bit_length for m in messages) == 2 * 48 * 8


def test_decentralized_uplink_only_active_subsets(make_config):
    cfg = make_config(users=4, files=30, mu="1/2", value_bits=8, placement_mode="decentralized")
    placement, map_output = _prepare(cfg)
    sets = build_exclusive_sets(placement, map_output)
    messages = encode_decentralized_uplink(sets, cfg)
    active = {es.subset for es in sets}
    assert {m.subset for m in messages} == active
    for subset in active:
        assert sorted(m.sender for m in messages if m.subset == subset) == list(subset)


def test_plan_matches_encoder_without_payloads(make_config):
    cfg = make_config(users=4, files=30, mu="1/2", value_bits=12, placement_mode="decentralized")
    placement, map_output = _prepare(cfg)
    messages = encode_decentralized_uplink(build_exclusive_sets(placement, map_output), cfg)
    plan = plan_uplink(placement, cfg.value_bits)
    assert all(es.payload is None for es in plan.exclusive_sets)
    assert [(p.sender, p.subset, p.bit_length) for p in plan.messages] == [
        (m.sender, m.subset, m.bit_length) for m in messages
    ]
    uncoded = plan_uplink(placement, cfg.value_bits, coded=False)
    assert len(uncoded.messages) == len(plan.exclusive_sets)
    assert not uncoded.coded


def test_materializing_a_plan_needs_payloads(golden_setup):
    cfg, placement, _, _, _ = golden_setup
    plan = plan_uplink(placement, cfg.value_bits)
    with pytest.raises(ValueError):
        encode_centralized_uplink(list(plan.exclusive_sets), cfg)

