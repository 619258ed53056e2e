"""Runtime data objects of the system model."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from app.core.bits import BitVector


@dataclass(frozen=True, slots=True, eq=False)
class Dataset:
    """Seeded file payloads w_1..w_N and user inputs d_1..d_K."""

    files: tuple[BitVector, ...]
    inputs: tuple[BitVector, ...]

    def file(self, n: int) -> BitVector:
        return self.files[n - 1]

    def input(self, k: int) -> BitVector:
        return self.inputs[k - 1]

    @property
    def file_count(self) -> int:
        return len(self.files)

    @property
    def input_count(self) -> int:
        return len(self.inputs)


@dataclass(frozen=True, slots=True, eq=False)
class IntermediateValue:
    """Map output v_{k,n} for input k and file n."""

    input_index: int
    file_index: int
    payload: BitVector


MapFunction = Callable[[BitVector, BitVector], BitVector]
ReduceFunction = Callable[[Sequence[BitVector]], BitVector]


@dataclass(frozen=True, slots=True)
class ComputeFunctions:
    """The pluggable Map/Reduce pair.

    ``map`` turns (input, file) into a value of ``value_bits`` bits; ``reduce``
    turns the file-index-ordered values of one input into ``output_bits`` bits.
    """

    map: MapFunction
    reduce: ReduceFunction
    value_bits: int
    output_bits: int
    hash_id: str
