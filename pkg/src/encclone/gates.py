"""Gate kinds and their matrices.

Two-qubit matrices use the local index ``b0 + 2*b1`` where ``b0`` is the bit of
the first target (for CNOT: the control).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

ONE_QUBIT = {"H", "X", "Z", "S", "SDG", "SX", "RZ"}
TWO_QUBIT = {"CNOT", "CZ"}
MARKERS = {"IDLE", "MEASURE"}
KINDS = ONE_QUBIT | TWO_QUBIT | MARKERS
PARAMETRIC = {"RZ", "IDLE"}
CLIFFORD_FIXED = {"H", "X", "Z", "S", "SDG", "SX", "CNOT", "CZ"}

_SQ2 = 1 / math.sqrt(2)


@dataclass(frozen=True)
class Gate:
    """A gate kind with an optional parameter (RZ angle in radians, IDLE duration in µs)."""

    kind: str
    param: Optional[float] = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if kind in PARAMETRIC:
            if self.param is None or not math.isfinite(self.param):
                raise ValueError(f"{kind} needs a finite parameter")
            if kind == "IDLE" and self.param < 0:
                raise ValueError("IDLE duration must be >= 0")
        elif self.param is not None:
            raise ValueError(f"{kind} takes no parameter")

    @property
    def arity(self) -> int:
        return 2 if self.kind in TWO_QUBIT else 1

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT

    @property
    def is_marker(self) -> bool:
        return self.kind in MARKERS

    def is_clifford(self) -> bool:
        if self.kind in CLIFFORD_FIXED or self.kind in MARKERS:
            return True
        return rz_quarter_turns(self.param) is not None

    def matrix(self) -> np.ndarray:
        return gate_matrix(self)

    def __str__(self):
        return self.kind if self.param is None else f"{self.kind}({self.param:g})"


def rz_quarter_turns(theta: float, tol: float = 1e-12) -> Optional[int]:
    """Return k in 0..3 if theta = k*pi/2 (mod 2*pi), else None."""
    k = theta / (math.pi / 2)
    kr = round(k)
    if abs(k - kr) > tol * max(1.0, abs(k)):
        return None
    return int(kr) % 4


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    # control = bit 0, target = bit 1
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
    ),
}


def gate_matrix(gate: Gate) -> np.ndarray:
    if gate.kind == "RZ":
        return rz(gate.param)
    if gate.kind in MARKERS:
        return np.eye(2, dtype=complex)
    return _FIXED[gate.kind].copy()


H = Gate("H")
X = Gate("X")
Z = Gate("Z")
S = Gate("S")
SDG = Gate("SDG")
SX = Gate("SX")
CNOT = Gate("CNOT")
CZ = Gate("CZ")
MEASURE = Gate("MEASURE")


def RZ(theta: float) -> Gate:
    return Gate("RZ", float(theta))


def IDLE(duration: float) -> Gate:
    return Gate("IDLE", float(duration))
