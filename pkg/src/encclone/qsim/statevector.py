"""Dense statevector engine."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gates import Gate, gate_matrix
from .counts import CountsTable
from .kernels import apply_matrix
from .paulis import PAULI_MATRICES, PauliString

DEFAULT_MAX_QUBITS = 26


class CapacityError(RuntimeError):
    """Register too large for the selected backend."""


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise ValueError("amplitude length must be 2**num_qubits")

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        n = int(round(np.log2(len(amps))))
        if 1 << n != len(amps):
            raise ValueError("length is not a power of two")
        if abs(np.vdot(amps, amps).real - 1) > 1e-12:
            raise ValueError("amplitudes are not normalised")
        return cls(n, amps.copy())


def sv_init(num_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    if num_qubits > max_qubits:
        raise CapacityError(
            f"{num_qubits} qubits exceed the statevector limit of {max_qubits}"
        )
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def _check_targets(n: int, targets) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated target in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise IndexError(f"qubit {t} out of range for {n} qubits")
    return targets


def sv_apply(state: StateVector, gate: Gate | np.ndarray, targets) -> StateVector:
    """Apply a gate (or raw unitary) to ``targets`` in place; returns ``state``."""
    targets = _check_targets(state.num_qubits, targets)
    if isinstance(gate, Gate):
        if gate.is_marker:
            return state
        if gate.arity != len(targets):
            raise ValueError(f"{gate.kind} expects {gate.arity} target(s), got {len(targets)}")
        m = gate_matrix(gate)
    else:
        m = np.asarray(gate, dtype=complex)
        if m.shape != (1 << len(targets),) * 2:
            raise ValueError("matrix size does not match target count")
    state.amplitudes = apply_matrix(state.amplitudes, state.num_qubits, targets, m)
    return state


def sv_run(circuit, state: StateVector | None = None, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Run a circuit from |0...0> (or from ``state``)."""
    if state is None:
        state = sv_init(circuit.num_qubits, max_qubits)
    for op in circuit.ops:
        sv_apply(state, op.gate, op.qubits)
    return state


def sv_expect_pauli(state: StateVector, p: PauliString) -> float:
    if p.num_qubits != state.num_qubits:
        raise ValueError("Pauli string length does not match register")
    phi = state.amplitudes.copy()
    for q, c in enumerate(p.ops):
        if c != "I":
            phi = apply_matrix(phi, state.num_qubits, (q,), PAULI_MATRICES[c])
    val = p.coefficient * np.vdot(state.amplitudes, phi)
    return float(val.real)


def _keep_matrix(state: StateVector, keep) -> np.ndarray:
    n = state.num_qubits
    keep = list(keep)
    if not keep:
        raise ValueError("keep must be nonempty")
    _check_targets(n, keep)
    t = state.amplitudes.reshape((2,) * n)
    keep_axes = [n - 1 - q for q in reversed(keep)]
    rest = [a for a in range(n) if a not in keep_axes]
    return np.transpose(t, rest + keep_axes).reshape(1 << len(rest), 1 << len(keep))


def sv_reduced(state: StateVector, keep):
    """Partial trace onto ``keep``; ``keep[0]`` becomes qubit 0 of the result."""
    from .density import DensityMatrix

    m = _keep_matrix(state, keep)
    rho = m.T @ m.conj()
    return DensityMatrix(len(list(keep)), rho)


def sv_probabilities(state: StateVector, qubits) -> np.ndarray:
    """Born distribution over ``qubits``; bit i of the index is ``qubits[i]``."""
    n = state.num_qubits
    qubits = list(qubits)
    _check_targets(n, qubits)
    p = (state.amplitudes.real ** 2 + state.amplitudes.imag ** 2).reshape((2,) * n)
    axes = [n - 1 - q for q in reversed(qubits)]
    rest = tuple(a for a in range(n) if a not in axes)
    marg = p.sum(axis=rest) if rest else p
    # remaining axes are in increasing original order; reorder to ``axes``
    remaining = sorted(axes)
    marg = np.transpose(marg, [remaining.index(a) for a in axes])
    return marg.reshape(-1)


def sample_distribution(probs: np.ndarray, qubits, shots: int, seed: int) -> CountsTable:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.clip(np.asarray(probs, dtype=float), 0, None)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    hist = rng.multinomial(shots, probs)
    return CountsTable.from_histogram(hist, len(qubits), seed, tuple(qubits))


def sv_sample(state: StateVector, qubits, shots: int, seed: int) -> CountsTable:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return sample_distribution(sv_probabilities(state, qubits), list(qubits), shots, seed)
