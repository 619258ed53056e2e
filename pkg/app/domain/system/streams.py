"""Seeded random streams, one per purpose, so runs replay bit-exactly."""
from __future__ import annotations

import numpy as np

STREAM_DATASET = 1
STREAM_PLACEMENT = 2
STREAM_PARTICIPANTS = 3
STREAM_COEFFICIENTS = 4


def stream_rng(seed: int, stream: int, *extra: int) -> np.random.Generator:
    """Independent, reproducible generator for one purpose of one run."""
    return np.random.default_rng([seed, stream, *extra])
