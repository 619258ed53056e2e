from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.domain.uplink.models import UserSubset


@dataclass(frozen=True, slots=True, eq=False)
class DownlinkBlock:
    """One broadcast block for subset ``subset``.

    ``coefficients[m]`` multiplies the m-th uplink message of the subset in
    arrival order. ``payload`` holds whole bytes; ``bit_length`` is what the
    block costs on the air.
    """

    subset: UserSubset
    index: int
    coefficients: np.ndarray
    payload: np.ndarray
    bit_length: int
    padding_bits: int = 0
    retries: int = 0

    @property
    def byte_length(self) -> int:
        return int(self.payload.size)
