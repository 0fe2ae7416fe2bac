"""Fidelity, parity-oscillation and CHSH estimators with shot-noise sigmas.

Variances use the binomial form p(1-p)/N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import gates as g
from .circuit import Circuit, CircuitBuilder
from .qsim.counts import CountsTable

METHODS = ("BSM", "POM", "exact")
SCENARIOS = ("2-1", "2-2", "2-3", "undecrypted")


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    sigma: float
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be finite and >= 0")
        if self.method == "exact" and self.sigma != 0:
            raise ValueError("exact estimates carry sigma = 0")
        if not -1e-9 <= self.value <= 1 + 1e-9:
            raise ValueError(f"fidelity {self.value} outside [0, 1]")

    def to_row(self) -> str:
        return f"{self.method},{self.value!r},{self.sigma!r}"


def bell_fidelity(xx: float, yy: float, zz: float) -> float:
    """<phi|rho|phi> from the three diagonal two-point correlators."""
    return (1 + xx - yy + zz) / 4


def exact_fidelity(value: float) -> FidelityEstimate:
    return FidelityEstimate(min(1.0, max(0.0, float(value))), 0.0, "exact")


# ---------------------------------------------------------------------------
# Bell-state measurement


def bsm_circuit(a: int, b: int, num_qubits: int) -> Circuit:
    """Disentangler mapping |phi> to |00>, followed by readout of (a, b)."""
    return CircuitBuilder(num_qubits).cnot(a, b).h(a).measure(a).measure(b).build()


def bsm_fidelity(counts: CountsTable) -> FidelityEstimate:
    if counts.total_shots < 1:
        raise ValueError("empty counts")
    if counts.counts and len(next(iter(counts.counts))) != 2:
        raise ValueError("BSM counts must cover exactly two bits")
    n = counts.total_shots
    f = counts.get("00") / n
    return FidelityEstimate(f, math.sqrt(f * (1 - f) / n), "BSM")


# ---------------------------------------------------------------------------
# parity oscillations


@dataclass(frozen=True)
class POMSetting:
    """Equatorial setting M_k = (cos t X + sin t Y)^{x r}, t = k pi / r."""

    k: int
    theta: float

    def rotation(self, qubits: Sequence[int], num_qubits: int) -> Circuit:
        """Gates mapping M_k onto Z..Z: RZ(-t) then H on every qubit."""
        b = CircuitBuilder(num_qubits)
        for q in qubits:
            b.rz(-self.theta, q).h(q)
        return b.build()

    def pauli_expansion(self, r: int):
        """(x bits, z bits, weights) of the 2^r Pauli strings in M_k."""
        return pauli_expansion(self.theta, r)


def pom_settings(r: int) -> list[POMSetting]:
    """The r equatorial settings; with the Z basis this makes r+1 settings."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return [POMSetting(k, k * math.pi / r) for k in range(1, r + 1)]


def pauli_expansion(theta: float, r: int):
    strings = np.array(list(itertools.product((0, 1), repeat=r)), dtype=np.uint8)  # 1 = Y
    ny = strings.sum(axis=1)
    c, s = math.cos(theta), math.sin(theta)
    weights = c ** (r - ny) * s ** ny
    x = np.ones_like(strings)
    return x, strings.copy(), weights


def z_strings(r: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=r)), dtype=np.uint8)


@dataclass
class POMData:
    z_counts: CountsTable
    E: Sequence[float]
    r: int
    shots: int

    def __post_init__(self):
        if len(self.E) != self.r:
            raise ValueError(f"expected {self.r} setting expectations, got {len(self.E)}")
        if any(abs(e) > 1 + 1e-12 for e in self.E):
            raise ValueError("setting expectations must lie in [-1, 1]")


def chi_from(E: Sequence[float]) -> float:
    r = len(E)
    return sum((-1) ** k * e for k, e in zip(range(1, r + 1), E)) / r


def pom_fidelity(data: POMData) -> FidelityEstimate:
    r = data.r
    n = data.z_counts.total_shots
    p0 = data.z_counts.frequency("0" * r)
    p1 = data.z_counts.frequency("1" * r)
    chi = chi_from(data.E)
    value = (p0 + p1 + chi) / 2
    var_p = (p0 * (1 - p0) + p1 * (1 - p1)) / n
    var_chi = sum(1 - e * e for e in data.E) / (r * r * data.shots)
    # the (P + chi)/2 combination, with sigma as sqrt(Var P + Var chi)
    return FidelityEstimate(min(1.0, max(0.0, value)), math.sqrt(var_p + var_chi), "POM")


def pom_exact(expect_batch: Callable[[np.ndarray, np.ndarray], np.ndarray], r: int) -> tuple[FidelityEstimate, dict]:
    """Exact POM fidelity from a batched Pauli-expectation oracle on r qubits.

    The Z-basis populations come from all Z..Z subsets; each M_k from its
    Pauli expansion.  Returns the estimate and the intermediate quantities.
    """
    zs = z_strings(r)
    ez = expect_batch(np.zeros_like(zs), zs)
    sign = (-1.0) ** zs.sum(axis=1)
    p0 = float(ez.sum() / 2 ** r)
    p1 = float((sign * ez).sum() / 2 ** r)
    E = []
    for st in pom_settings(r):
        x, z, w = st.pauli_expansion(r)
        E.append(float(np.dot(w, expect_batch(x, z))))
    chi = chi_from(E)
    return exact_fidelity((p0 + p1 + chi) / 2), {"p0": p0, "p1": p1, "E": E, "chi": chi}


def dense_expect_batch(rho: np.ndarray) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Batched tr(rho P) for a small dense density matrix (qubit 0 = LSB)."""
    from .qsim.paulis import pauli_from_bits

    def fn(bx, bz):
        return np.array([np.real(np.trace(rho @ pauli_from_bits(x, z).matrix())) for x, z in zip(bx, bz)])

    return fn


# ---------------------------------------------------------------------------
# CHSH


@dataclass(frozen=True)
class CHSHEstimate:
    S: float
    sigma: float
    scenario: str

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be finite and >= 0")


# Alice (A~) measures Z or X; Bob (the clone) measures (Z +- X)/sqrt(2)
CHSH_SETTINGS = (("Z", +1), ("Z", -1), ("X", +1), ("X", -1))
CHSH_SIGNS = (1, 1, 1, -1)


def chsh_estimate(correlators: Sequence[float], scenario: str, shots: int | None = None) -> CHSHEstimate:
    """S = E(Z,+) + E(Z,-) + E(X,+) - E(X,-).

    ``correlators`` are the four values in CHSH_SETTINGS order.  With ``shots``
    each is treated as a +-1 sample mean over that many shots; otherwise exact.
    """
    if len(correlators) != 4 or any(c is None for c in correlators):
        raise ValueError("need four correlators")
    s = sum(sg * c for sg, c in zip(CHSH_SIGNS, correlators))
    sigma = 0.0
    if shots:
        sigma = math.sqrt(sum(max(0.0, 1 - c * c) for c in correlators) / shots)
    return CHSHEstimate(float(s), sigma, scenario)


def chsh_from_paulis(zz: float, zx: float, xz: float, xx: float) -> list[float]:
    """Rotated correlators from the Pauli pairs (Alice first, Bob second)."""
    r = 1 / math.sqrt(2)
    return [r * (zz + zx), r * (zz - zx), r * (xz + xx), r * (xz - xx)]


def ry_ops(b: CircuitBuilder, theta: float, q: int) -> None:
    """RY(theta) as S . H . RZ(theta) . H . S^dagger (rightmost first)."""
    b.sdg(q).h(q).rz(theta, q).h(q).s(q)


def chsh_rotation(alice_basis: str, bob_sign: int, alice: int, bob: int, b: CircuitBuilder, which: str = "both") -> None:
    """Append the basis changes so that Z readout measures the chosen setting."""
    if which in ("both", "alice") and alice_basis == "X":
        b.h(alice)
    if which in ("both", "bob"):
        ry_ops(b, -bob_sign * math.pi / 4, bob)


# ---------------------------------------------------------------------------
# thresholds


def witness_and_floor(F: FidelityEstimate | float, r: int) -> str:
    """'witnessed' above 1/2, 'above-floor' above 2^-r, else 'at-floor'."""
    v = F.value if isinstance(F, FidelityEstimate) else float(F)
    if v > 0.5:
        return "witnessed"
    if v > 2.0 ** (-r):
        return "above-floor"
    return "at-floor"
