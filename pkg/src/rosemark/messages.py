"""Fixed-length binary signatures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np


@dataclass(frozen=True)
class BitMessage:
    bits: Tuple[int, ...]

    def __post_init__(self):
        if not all(b in (0, 1) for b in self.bits):
            raise ValueError("message bits must be 0 or 1")

    def __len__(self):
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    @staticmethod
    def of(bits: Iterable[int]) -> "BitMessage":
        return BitMessage(tuple(int(b) for b in bits))

    @staticmethod
    def from_string(text: str) -> "BitMessage":
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"not a bit string: {text!r}")
        return BitMessage(tuple(int(c) for c in text))

    @staticmethod
    def random(rng, n_bits: int) -> "BitMessage":
        return BitMessage(tuple(int(b) for b in rng.integers(0, 2, size=n_bits)))

    def to_array(self, dtype=np.float32) -> np.ndarray:
        return np.asarray(self.bits, dtype=dtype)

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    def complement(self) -> "BitMessage":
        return BitMessage(tuple(1 - b for b in self.bits))
