"""Density matrices and Kraus channels.

The matrix is handled as a vector over ``2n`` bits: column qubit ``q`` is bit
``q`` and row qubit ``q`` is bit ``n + q`` of the flattened (C-order) index, so
``U rho U^dagger`` is ``U`` on the row bits and ``conj(U)`` on the column bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gates import Gate, gate_matrix
from .counts import CountsTable
from .kernels import apply_matrix
from .paulis import PAULI_MATRICES, PauliString
from .statevector import CapacityError, StateVector, _check_targets, sample_distribution

DEFAULT_MAX_DM_QUBITS = 13


@dataclass
class DensityMatrix:
    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        d = 1 << self.num_qubits
        if self.entries.shape != (d, d):
            raise ValueError("density matrix must be 2^n x 2^n")

    @classmethod
    def from_statevector(cls, sv: StateVector) -> "DensityMatrix":
        a = sv.amplitudes
        return cls(sv.num_qubits, np.outer(a, a.conj()))

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 1 << num_qubits
        return cls(num_qubits, np.eye(d, dtype=complex) / d)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.num_qubits, self.entries.copy())

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.entries, self.entries)))

    def check(self, tol: float = 1e-10) -> None:
        """Raise if the Hermitian/trace/positivity invariants fail."""
        m = self.entries
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("not Hermitian")
        if abs(np.trace(m) - 1) > tol:
            raise ValueError("trace differs from 1")
        if np.min(np.linalg.eigvalsh(m)) < -tol:
            raise ValueError("not positive semidefinite")


def dm_init(num_qubits: int, max_qubits: int = DEFAULT_MAX_DM_QUBITS) -> DensityMatrix:
    if num_qubits > max_qubits:
        raise CapacityError(f"{num_qubits} qubits exceed the density-matrix limit of {max_qubits}")
    d = 1 << num_qubits
    m = np.zeros((d, d), dtype=complex)
    m[0, 0] = 1
    return DensityMatrix(num_qubits, m)


def _apply_unitary(dm: DensityMatrix, u: np.ndarray, targets) -> None:
    n = dm.num_qubits
    vec = dm.entries.reshape(-1)
    vec = apply_matrix(vec, 2 * n, [n + q for q in targets], u)
    vec = apply_matrix(vec, 2 * n, list(targets), u.conj())
    dm.entries = vec.reshape(1 << n, 1 << n)


def dm_apply(dm: DensityMatrix, gate: Gate | np.ndarray, targets) -> DensityMatrix:
    targets = _check_targets(dm.num_qubits, targets)
    if isinstance(gate, Gate):
        if gate.is_marker:
            return dm
        if gate.arity != len(targets):
            raise ValueError(f"{gate.kind} expects {gate.arity} target(s)")
        u = gate_matrix(gate)
    else:
        u = np.asarray(gate, dtype=complex)
    _apply_unitary(dm, u, targets)
    return dm


def superoperator(kraus) -> np.ndarray:
    """Sum of ``K kron conj(K)``, acting on local index ``col + d*row``."""
    return sum(np.kron(k, k.conj()) for k in kraus)


def check_trace_preserving(kraus, tol: float = 1e-10) -> None:
    d = kraus[0].shape[0]
    acc = sum(k.conj().T @ k for k in kraus)
    if np.max(np.abs(acc - np.eye(d))) > tol:
        raise ValueError("Kraus set is not trace preserving")


def dm_apply_channel(dm: DensityMatrix, kraus, targets) -> DensityMatrix:
    """rho -> sum_k K rho K^dagger on ``targets`` (in place; returns ``dm``)."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    targets = _check_targets(dm.num_qubits, targets)
    if kraus[0].shape != (1 << len(targets),) * 2:
        raise ValueError("Kraus operator size does not match target count")
    check_trace_preserving(kraus)
    if len(kraus) == 1:
        _apply_unitary(dm, kraus[0], targets)
        return dm
    n = dm.num_qubits
    sop = superoperator(kraus)
    bits = list(targets) + [n + q for q in targets]
    vec = apply_matrix(dm.entries.reshape(-1), 2 * n, bits, sop)
    dm.entries = vec.reshape(1 << n, 1 << n)
    return dm


def dm_expect_pauli(dm: DensityMatrix, p: PauliString) -> float:
    if p.num_qubits != dm.num_qubits:
        raise ValueError("Pauli string length does not match register")
    n = dm.num_qubits
    vec = dm.entries.reshape(-1).copy()
    for q, c in enumerate(p.ops):
        if c != "I":
            vec = apply_matrix(vec, 2 * n, (n + q,), PAULI_MATRICES[c])
    # tr(P rho) after P acted on the row index
    return float((p.coefficient * np.trace(vec.reshape(1 << n, 1 << n))).real)


def dm_reduced(dm: DensityMatrix, keep) -> DensityMatrix:
    n = dm.num_qubits
    keep = list(keep)
    _check_targets(n, keep)
    t = dm.entries.reshape((2,) * (2 * n))
    row_keep = [n - 1 - q for q in reversed(keep)]
    col_keep = [2 * n - 1 - q for q in reversed(keep)]
    rest = [q for q in range(n) if q not in keep]
    row_rest = [n - 1 - q for q in rest]
    col_rest = [2 * n - 1 - q for q in rest]
    t = np.transpose(t, row_keep + row_rest + col_keep + col_rest)
    k = len(keep)
    t = t.reshape(1 << k, 1 << len(rest), 1 << k, 1 << len(rest))
    return DensityMatrix(k, np.einsum("arbr->ab", t))


def dm_probabilities(dm: DensityMatrix, qubits) -> np.ndarray:
    red = dm_reduced(dm, qubits)
    return np.clip(np.real(np.diag(red.entries)), 0, None)


def dm_sample(dm: DensityMatrix, qubits, shots: int, seed: int) -> CountsTable:
    return sample_distribution(dm_probabilities(dm, qubits), list(qubits), shots, seed)


def dm_run(circuit, dm: DensityMatrix | None = None) -> DensityMatrix:
    if dm is None:
        dm = dm_init(circuit.num_qubits)
    for op in circuit.ops:
        dm_apply(dm, op.gate, op.qubits)
    return dm


def fidelity_with_pure(dm: DensityMatrix, target: StateVector) -> float:
    """<psi| rho |psi>, clipped to [0, 1] against round-off."""
    if dm.num_qubits != target.num_qubits:
        raise ValueError("dimension mismatch")
    psi = target.amplitudes
    f = float(np.real(np.vdot(psi, dm.entries @ psi)))
    return min(1.0, max(0.0, f))
