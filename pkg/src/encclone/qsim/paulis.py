"""Pauli strings and binary-symplectic helpers.

A Pauli string over ``n`` qubits is stored as two length-``n`` bit vectors
``(x, z)`` plus a phase exponent ``e`` (mod 4), standing for
``i**e * prod_q sigma(x_q, z_q)`` where ``sigma(1, 1) = Y`` (not ``XZ``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

SYMBOLS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_FROM_BITS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis with a complex coefficient.

    ``ops[q]`` is the symbol acting on qubit ``q``.
    """

    ops: str
    coefficient: complex = 1.0

    def __post_init__(self):
        if not self.ops or any(c not in SYMBOLS for c in self.ops):
            raise ValueError(f"invalid Pauli symbols {self.ops!r}")
        if self.coefficient == 0:
            raise ValueError("Pauli coefficient must be nonzero")

    @property
    def num_qubits(self) -> int:
        return len(self.ops)

    @classmethod
    def from_sparse(cls, num_qubits: int, terms: dict[int, str], coefficient: complex = 1.0) -> "PauliString":
        """Build from ``{qubit: symbol}``; unlisted qubits get identity."""
        ops = ["I"] * num_qubits
        for q, s in terms.items():
            if not 0 <= q < num_qubits:
                raise IndexError(f"qubit {q} out of range for {num_qubits} qubits")
            ops[q] = s
        return cls("".join(ops), coefficient)

    def bits(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.array([_TO_BITS[c][0] for c in self.ops], dtype=np.uint8)
        z = np.array([_TO_BITS[c][1] for c in self.ops], dtype=np.uint8)
        return x, z

    def support(self) -> list[int]:
        return [q for q, c in enumerate(self.ops) if c != "I"]

    def matrix(self) -> np.ndarray:
        """Dense matrix, qubit 0 as least significant index bit."""
        mats = [PAULI_MATRICES[c] for c in reversed(self.ops)]
        return self.coefficient * reduce(np.kron, mats)

    def __str__(self):
        return f"{self.coefficient}*{self.ops}" if self.coefficient != 1 else self.ops


def pauli_from_bits(x, z, coefficient: complex = 1.0) -> PauliString:
    return PauliString("".join(_FROM_BITS[(int(a), int(b))] for a, b in zip(x, z)), coefficient)


def g_phase(x1, z1, x2, z2):
    """Exponent of ``i`` picked up when multiplying single-qubit Paulis.

    Vectorised over any broadcastable integer arrays; returns values in {-1, 0, 1}.
    """
    x1 = np.asarray(x1, dtype=np.int8)
    z1 = np.asarray(z1, dtype=np.int8)
    x2 = np.asarray(x2, dtype=np.int8)
    z2 = np.asarray(z2, dtype=np.int8)
    y = x1 & z1
    xo = x1 & (1 - z1)
    zo = (1 - x1) & z1
    return y * (z2 - x2) + xo * z2 * (2 * x2 - 1) + zo * x2 * (1 - 2 * z2)


def multiply(x1, z1, e1, x2, z2, e2):
    """Product of Pauli operators in ``(x, z, e)`` form, vectorised over rows.

    ``x*``/``z*`` have shape ``(..., n)``; exponents have shape ``(...)``.
    """
    e = (np.asarray(e1) + np.asarray(e2) + g_phase(x1, z1, x2, z2).sum(axis=-1)) % 4
    return np.bitwise_xor(x1, x2), np.bitwise_xor(z1, z2), e


def anticommutes(x1, z1, x2, z2) -> np.ndarray:
    """Symplectic product mod 2, broadcasting over leading axes."""
    return ((x1 & z2).sum(axis=-1) + (z1 & x2).sum(axis=-1)) % 2
