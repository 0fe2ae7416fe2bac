from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CountsTable:
    """Shot counts keyed by bitstring.

    Character ``i`` of every key is the outcome of ``qubits[i]`` (left to right in
    the order the qubits were requested, not reversed).
    """

    counts: dict[str, int]
    total_shots: int
    seed: int | None = None
    qubits: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if sum(self.counts.values()) != self.total_shots:
            raise ValueError("counts do not sum to total_shots")
        lengths = {len(k) for k in self.counts}
        if len(lengths) > 1:
            raise ValueError("inconsistent bitstring lengths")
        if self.qubits and lengths and lengths != {len(self.qubits)}:
            raise ValueError("key length differs from measured-qubit count")

    def get(self, key: str) -> int:
        return self.counts.get(key, 0)

    def frequency(self, key: str) -> float:
        return self.get(key) / self.total_shots

    def parity_expectation(self) -> float:
        """Empirical <Z x ... x Z> over all measured bits."""
        tot = 0
        for k, c in self.counts.items():
            tot += c if k.count("1") % 2 == 0 else -c
        return tot / self.total_shots

    @classmethod
    def from_indices(cls, outcomes: np.ndarray, num_bits: int, seed, qubits=()) -> "CountsTable":
        """Build from integer outcomes whose bit ``i`` is the result of ``qubits[i]``."""
        vals, cnt = np.unique(np.asarray(outcomes, dtype=np.int64), return_counts=True)
        counts = {_key(int(v), num_bits): int(c) for v, c in zip(vals, cnt)}
        return cls(counts, int(cnt.sum()), seed, tuple(qubits))

    @classmethod
    def from_histogram(cls, hist: np.ndarray, num_bits: int, seed, qubits=()) -> "CountsTable":
        counts = {_key(i, num_bits): int(c) for i, c in enumerate(hist) if c}
        return cls(counts, int(np.sum(hist)), seed, tuple(qubits))


def _key(value: int, num_bits: int) -> str:
    return "".join("1" if (value >> i) & 1 else "0" for i in range(num_bits))
