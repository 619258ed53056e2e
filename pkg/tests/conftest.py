from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Callable

import pytest

from app.domain.compute.services import run_map
from app.domain.placement.services import build_placement
from app.domain.system.schemas import SystemConfig
from app.domain.system.services import default_compute_functions, synthesize_dataset, validate_config


@pytest.fixture
def make_config() -> Callable[..., SystemConfig]:
    def factory(**overrides: Any) -> SystemConfig:
        values: dict[str, Any] = {"users": 3, "files": 6, "mu": Fraction(2, 3), "value_bits": 64, "seed": 11}
        values.update(overrides)
        return SystemConfig(**values)

    return factory


@pytest.fixture
def golden_config(make_config) -> SystemConfig:
    """Three users, six files, each file at two users."""
    return make_config()


@pytest.fixture
def golden_setup(golden_config):
    """Placement, dataset, functions and map output of the golden scenario."""
    validated = validate_config(golden_config)
    placement = build_placement(validated)
    dataset = synthesize_dataset(golden_config)
    fns = default_compute_functions(golden_config)
    map_output = run_map(placement, dataset, fns)
    return golden_config, placement, dataset, fns, map_output


@pytest.fixture
def restore_root_logger():
    """Undo ``setup_logging`` so handlers never outlive the test's captured streams."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield root
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers, root.level = handlers, level
