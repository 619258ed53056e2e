from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import ConfigError, DivisibilityViolation
from app.domain.placement.models import PlacementKind, ReplicationHistogram
from app.domain.placement.services import (
    build_placement,
    centralized_placement,
    decentralized_placement,
    dump_placement,
    information_loss,
    load_placement,
    memory_sharing_partition,
    memory_sharing_placement,
    replication_histogram,
    suggest_file_count,
)
from app.domain.system.services import validate_config


def _files(placement, k):
    return [int(n) for n in placement.files_of(k)]


def test_golden_centralized_batches(golden_config):
    placement = centralized_placement(golden_config)
    assert placement.kind is PlacementKind.CENTRALIZED
    assert placement.batches == {(1, 2): (1, 2), (1, 3): (3, 4), (2, 3): (5, 6)}
    assert _files(placement, 1) == [1, 2, 3, 4]
    assert _files(placement, 2) == [1, 2, 5, 6]
    assert _files(placement, 3) == [3, 4, 5, 6]
    assert placement.available_files() == (1, 2, 3, 4, 5, 6)


def test_centralized_every_file_at_exactly_t_users(make_config):
    cfg = make_config(users=5, files=20, mu="2/5")
    placement = centralized_placement(cfg)
    incidence = placement.incidence()
    assert incidence.shape == (5, 20)
    assert (incidence.sum(axis=0) == 2).all()
    assert (incidence.sum(axis=1) == 8).all()


def test_centralized_requires_integer_replication(make_config):
    with pytest.raises(ConfigError):
        centralized_placement(make_config(users=4, files=48, mu="3/8"))
    with pytest.raises(DivisibilityViolation):
        centralized_placement(make_config(users=4, files=7, mu="1/2"))


def test_placement_arrays_are_read_only(golden_config):
    placement = centralized_placement(golden_config)
    with pytest.raises(ValueError):
        placement.files_of(1)[0] = 6


def test_memory_sharing_partition_and_placement(make_config):
    sharing = memory_sharing_partition(4, Fraction(3, 8), 48)
    assert (sharing.low_replication, sharing.high_replication) == (1, 2)
    assert (sharing.low_files, sharing.high_files) == (24, 24)
    assert sharing.sub_fractions(4) == (Fraction(1, 4), Fraction(1, 2))

    placement = memory_sharing_placement(make_config(users=4, files=48, mu="3/8"))
    assert placement.kind is PlacementKind.MEMORY_SHARING
    assert replication_histogram(placement).counts == (0, 24, 24, 0, 0)
    assert all(len(placement.files_of(k)) == 18 for k in placement.all_users)
    # low-replication files come first
    assert (placement.incidence()[:, :24].sum(axis=0) == 1).all()


def test_memory_sharing_partition_errors():
    with pytest.raises(ConfigError):
        memory_sharing_partition(4, Fraction(1, 2), 48)
    with pytest.raises(DivisibilityViolation) as excinfo:
        memory_sharing_partition(4, Fraction(3, 8), 47)
    assert excinfo.value.suggested_files == 48


@pytest.mark.parametrize(
    "users, mu, files, expected",
    [
        (3, Fraction(2, 3), 6, 6),
        (3, Fraction(2, 3), 7, 9),
        (4, Fraction(1, 2), 1, 6),
        (4, Fraction(3, 8), 32, 48),
        (5, Fraction(1), 3, 3),
    ],
)
def test_suggest_file_count(users, mu, files, expected):
    assert suggest_file_count(users, mu, files) == expected


def test_decentralized_placement_is_seeded(make_config):
    cfg = make_config(users=6, files=50, mu="1/3", placement_mode="decentralized")
    first = decentralized_placement(cfg)
    second = decentralized_placement(cfg)
    assert first.kind is PlacementKind.DECENTRALIZED
    assert first.same_sets(second)
    assert all(len(first.files_of(k)) == 16 for k in first.all_users)
    assert all(np.all(np.diff(first.files_of(k)) > 0) for k in first.all_users)
    assert first.metadata["stored_per_user"] == 16
    assert first.metadata["storage_floored"] is True

    reseeded = decentralized_placement(make_config(users=6, files=50, mu="1/3", placement_mode="decentralized", seed=3))
    assert not first.same_sets(reseeded)


def test_decentralized_participants_from_population(make_config):
    cfg = make_config(users=4, files=40, mu="1/2", placement_mode="decentralized", population=10)
    placement = decentralized_placement(cfg)
    labels = placement.metadata["participant_labels"]
    assert placement.users == 4
    assert len(labels) == 4
    assert list(labels) == sorted(set(labels))
    assert all(1 <= label <= 10 for label in labels)
    assert placement.metadata["population"] == 10


def test_build_placement_dispatch(make_config):
    assert build_placement(validate_config(make_config())).kind is PlacementKind.CENTRALIZED
    assert build_placement(validate_config(make_config(users=4, files=48, mu="3/8"))).kind is PlacementKind.MEMORY_SHARING
    decentralized = make_config(users=4, files=20, mu="1/2", placement_mode="decentralized")
    assert build_placement(validate_config(decentralized)).kind is PlacementKind.DECENTRALIZED


def test_histogram_and_information_loss(golden_config):
    placement = centralized_placement(golden_config)
    h = replication_histogram(placement)
    assert h.counts == (0, 0, 6, 0)
    assert h.users == 3
    assert h.file_count == 6
    assert h.stored_copies == 12
    assert information_loss(h) == 0

    # user 3 alone misses files 1 and 2
    assert replication_histogram(placement, participants=[3]).counts == (2, 4)
    assert information_loss(ReplicationHistogram(counts=(3, 1, 0))) == Fraction(3, 4)


def test_dump_and_load(golden_config):
    placement = centralized_placement(golden_config)
    text = dump_placement(placement)
    assert text.splitlines()[0] == "# files=6 kind=centralized users=3"
    assert text.splitlines()[1] == "1 2 3 4"
    loaded = load_placement(text)
    assert loaded.kind is PlacementKind.CENTRALIZED
    assert loaded.same_sets(placement)


def test_load_placement_without_header_and_errors():
    loaded = load_placement("1 2\n\n2 3\n\n\n")
    assert loaded.kind is PlacementKind.CUSTOM
    assert loaded.file_count == 3
    # interior blank line is a user without files, trailing ones are not users
    assert loaded.users == 3
    assert replication_histogram(loaded).counts == (0, 2, 1, 0)

    with pytest.raises(ConfigError):
        load_placement("1 two\n")
    with pytest.raises(ConfigError):
        load_placement("# files=2\n1 3\n")
    with pytest.raises(ConfigError):
        load_placement("# only a header\n")


def test_load_placement_users_header_keeps_trailing_empty_users():
    loaded = load_placement("# files=4 users=4\n1 2\n3 4\n")
    assert loaded.users == 4
    assert _files(loaded, 4) == []
    empty_last = load_placement(dump_placement(loaded))
    assert empty_last.same_sets(loaded)
    with pytest.raises(ConfigError, match="header says 1"):
        load_placement("# users=1\n1\n2\n")


@pytest.mark.parametrize(
    "header, message",
    [
        ("# files=3 kind=bogus", "Unknown placement kind 'bogus'"),
        ("# files=x", "files='x' is not an integer"),
        ("# files=0", "must be positive"),
        ("# users=two", "users='two' is not an integer"),
    ],
)
def test_load_placement_rejects_malformed_headers(header, message):
    with pytest.raises(ConfigError, match=message):
        load_placement(f"{header}\n1 2\n")


@pytest.mark.slow
def test_decentralized_replication_follows_binomial(make_config):
    cfg = make_config(users=4, files=100_000, mu="1/2", placement_mode="decentralized", seed=11)
    h = replication_histogram(decentralized_placement(cfg))
    for j, count in enumerate(h.counts):
        assert abs(count / h.file_count - math.comb(4, j) / 16) <= 0.01
    assert abs(float(information_loss(h)) - 0.0625) <= 0.005
