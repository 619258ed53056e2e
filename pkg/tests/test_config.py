from __future__ import annotations

import logging
from fractions import Fraction

import pytest
from pydantic import ValidationError

from app.core.config import Settings, settings
from app.core.errors import ConfigError, ConfigFileError
from app.core.logging_config import setup_logging
from app.core.validation import normalize_key, parse_int_list, parse_mu, parse_mu_list, read_config_file
from app.domain.system.schemas import Baseline, DownlinkMode, PlacementMode, SystemConfig


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("2/3", Fraction(2, 3)),
        (" 3 / 8 ", Fraction(3, 8)),
        ("0.6667", Fraction(2, 3)),
        ("0.5", Fraction(1, 2)),
        (0.25, Fraction(1, 4)),
        (1, Fraction(1)),
        (Fraction(5, 7), Fraction(5, 7)),
    ],
)
def test_parse_mu_accepts_fractions_and_decimals(raw, expected):
    assert parse_mu(raw) == expected


@pytest.mark.parametrize("raw", [None, "", "abc", "1/0", "2//3"])
def test_parse_mu_rejects_garbage(raw):
    with pytest.raises(ConfigError):
        parse_mu(raw)


def test_parse_mu_keeps_exact_small_denominators():
    # 0.05 has denominator 20, below the snapping limit
    assert parse_mu("0.05") == Fraction(1, 20)
    assert parse_mu("0.123456", max_denominator=10) == Fraction(1, 8)


def test_parse_int_list_forms():
    assert parse_int_list("4,6, 8") == [4, 6, 8]
    assert parse_int_list("4:7") == [4, 5, 6, 7]
    assert parse_int_list("") == []
    assert parse_int_list(None) == []
    with pytest.raises(ConfigError):
        parse_int_list("4,x")
    with pytest.raises(ConfigError):
        parse_int_list("a:9")


def test_parse_mu_list():
    assert parse_mu_list("1/4, 0.5,1") == [Fraction(1, 4), Fraction(1, 2), Fraction(1)]
    assert parse_mu_list(None) == []


def test_normalize_key():
    assert normalize_key("--value-bits") == "value_bits"
    assert normalize_key(" Users ") == "users"


def test_read_config_file(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text("# golden run\nusers=3\nvalue-bits = 64\nMU=\"2/3\"\n", encoding="utf-8")
    assert read_config_file(path) == {"users": "3", "value_bits": "64", "mu": "2/3"}


def test_read_config_file_missing(tmp_path):
    with pytest.raises(ConfigFileError):
        read_config_file(tmp_path / "absent.cfg")


def test_settings_defaults_and_log_level_normalization():
    assert settings.FIELD_POLYNOMIAL == 0x11D
    assert settings.HASH_PRIMITIVE == "blake2b"
    assert settings.FLOAT_DIGITS == 12
    assert Settings(LOG_LEVEL=" debug ").LOG_LEVEL == "DEBUG"
    assert Settings(LOG_LEVEL="").LOG_LEVEL == "INFO"


def test_system_config_parses_mu_and_defaults():
    cfg = SystemConfig(users=3, files=6, mu="0.6667")
    assert cfg.mu == Fraction(2, 3)
    assert cfg.value_bits == settings.DEFAULT_VALUE_BITS
    assert cfg.placement_mode is PlacementMode.CENTRALIZED
    assert cfg.downlink_mode is DownlinkMode.MDS
    assert cfg.baseline is Baseline.CODED


def test_system_config_is_frozen_and_strict():
    cfg = SystemConfig(users=3, files=6, mu="2/3")
    with pytest.raises(ValidationError):
        cfg.users = 4
    with pytest.raises(ValidationError):
        SystemConfig(users=3, files=6, mu="2/3", colour="blue")


def test_downlink_mode_random_retry_alias():
    assert DownlinkMode("randomretry") is DownlinkMode.RANDOM
    assert DownlinkMode("Random-Retry") is DownlinkMode.RANDOM
    with pytest.raises(ValueError):
        DownlinkMode("fountain")


def test_echo_is_flat_and_string_friendly():
    echo = SystemConfig(users=4, files=12, mu="1/2", placement_mode="decentralized").echo()
    assert echo["mu"] == "1/2"
    assert echo["placement_mode"] == "decentralized"
    assert echo["population"] == 4


def test_setup_logging_writes_to_log_file(tmp_path, monkeypatch, restore_root_logger):
    target = tmp_path / "logs" / "shufflecast.log"
    monkeypatch.setattr(settings, "LOG_FILE", str(target))
    setup_logging("debug")
    assert restore_root_logger.level == logging.DEBUG
    assert len(restore_root_logger.handlers) == 2

    logging.getLogger("app.test").info("placement ready")
    for handler in restore_root_logger.handlers:
        handler.flush()
    assert " | INFO | app.test | placement ready" in target.read_text(encoding="utf-8")


def test_setup_logging_unknown_level_falls_back_to_info(monkeypatch, restore_root_logger):
    monkeypatch.setattr(settings, "LOG_FILE", "")
    setup_logging("chatty")
    assert restore_root_logger.level == logging.INFO
    assert len(restore_root_logger.handlers) == 1
