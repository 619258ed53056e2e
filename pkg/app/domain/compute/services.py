"""Map and Reduce phases executed at the users."""
from __future__ import annotations

import logging
from typing import Iterable, Mapping

import numpy as np

from app.core.bits import BitVector
from app.core.errors import MissingValue
from app.domain.placement.models import Placement
from app.domain.system.models import ComputeFunctions, Dataset, IntermediateValue

from .models import LocalValues, MapOutput

logger = logging.getLogger(__name__)


def run_map(placement: Placement, dataset: Dataset, fns: ComputeFunctions) -> MapOutput:
    """Compute v_{q,n} for every input q and every file stored by some user.

    A value is a deterministic function of (d_q, w_n), so a file stored at
    several users is evaluated once and shared by all of them.
    """
    stored = placement.incidence().any(axis=0)
    inputs = dataset.input_count
    table = np.zeros((inputs, placement.file_count, fns.value_bits), dtype=np.uint8)

    for column in np.flatnonzero(stored):
        w_n = dataset.file(int(column) + 1)
        for q in range(1, inputs + 1):
            value = fns.map(dataset.input(q), w_n)
            if value.size != fns.value_bits:
                raise ValueError(f"map returned {value.size} bits, expected {fns.value_bits}")
            table[q - 1, column] = value

    table.setflags(write=False)
    stored.setflags(write=False)
    logger.debug(
        "Map phase: %d files x %d inputs evaluated for %d users",
        int(stored.sum()),
        inputs,
        placement.users,
    )
    return MapOutput(
        table=table,
        computed=stored,
        user_files=placement.user_files,
        value_bits=fns.value_bits,
    )


def run_reduce(
    k: int,
    local: LocalValues,
    recovered: Mapping[int, BitVector],
    available_files: Iterable[int],
    fns: ComputeFunctions,
) -> BitVector:
    """Reduce input ``k`` over ``available_files`` from local plus recovered values."""
    ordered: list[IntermediateValue] = []
    for n in sorted(set(available_files)):
        if local.has(n):
            value = local.value(k, n)
        elif n in recovered:
            value = IntermediateValue(k, n, recovered[n])
        else:
            raise MissingValue(n, k)
        if value.payload.size != fns.value_bits:
            raise ValueError(
                f"value of input {k}, file {n} holds {value.payload.size} bits, expected {fns.value_bits}"
            )
        ordered.append(value)
    return fns.reduce([value.payload for value in ordered])
