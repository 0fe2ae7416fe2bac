"""Dense reference constructions of the protocol operators and UQCM closed forms.

Everything here is built from Kronecker products of 2x2 Pauli matrices, never
from the circuit builders or simulator kernels, so it can serve as ground truth
for them.  Qubit ``k`` of every operator is bit ``k`` of the basis index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

DENSE_LIMIT = 12

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA = (I2, PX, PY, PZ)
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
CZ4 = np.diag([1, 1, 1, -1]).astype(complex)


def kron_lsb(*ops: np.ndarray) -> np.ndarray:
    """Tensor product with ``ops[0]`` acting on the least significant qubit."""
    return reduce(np.kron, reversed(ops))


def _check_size(k: int) -> None:
    if k > DENSE_LIMIT:
        raise ValueError(f"{k} qubits exceed the dense-oracle limit of {DENSE_LIMIT}")


def pauli_exp_quarter(p: np.ndarray) -> np.ndarray:
    """exp(-i pi/4 P) for a Pauli string P (P^2 = I)."""
    return (np.eye(p.shape[0]) - 1j * p) / math.sqrt(2)


def dense_u_enc(n: int) -> np.ndarray:
    """Encryption unitary on qubits [A, S_1..S_n]: exp(-i pi/4 X..X) exp(-i pi/4 Z..Z)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_size(n + 1)
    xs = kron_lsb(*([PX] * (n + 1)))
    zs = kron_lsb(*([PZ] * (n + 1)))
    return pauli_exp_quarter(xs) @ pauli_exp_quarter(zs)


def bell_state() -> np.ndarray:
    """(|00> + |11>)/sqrt(2)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / math.sqrt(2)
    return v


def bell_basis(mu: int) -> np.ndarray:
    """|phi_mu> = (sigma_mu x I)|phi>, sigma_mu on the first (least significant) qubit."""
    return kron_lsb(SIGMA[mu], I2) @ bell_state()


def alpha(n: int) -> tuple[complex, complex, complex, complex]:
    """Decryption phases (alpha_0..alpha_3)."""
    return (1, 1j, -(1j ** (n + 1)), 1j)


def dense_u_dec(n: int, j: int = 1) -> np.ndarray:
    """Decryption unitary on qubits [S_j, N_1..N_n].

    sum_mu alpha_mu |phi_mu><phi_mu| on (S_j, N_j) times sigma_mu^T on every
    other noise qubit.  Transposes are taken in the computational basis.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= j <= n:
        raise ValueError(f"clone index j={j} outside 1..{n}")
    _check_size(n + 1)
    al = alpha(n)
    dim = 1 << (n + 1)
    u = np.zeros((dim, dim), dtype=complex)
    for mu in range(4):
        phi = bell_basis(mu)
        proj = np.outer(phi, phi.conj())  # qubit 0 = S_j, qubit 1 = N_j
        factors = [I2] * (n + 1)
        for i in range(1, n + 1):
            if i != j:
                factors[i] = SIGMA[mu].T
        rest = kron_lsb(*factors)
        # place the projector on qubits 0 (S_j) and j (N_j)
        u += al[mu] * _embed_pair(proj, 0, j, n + 1) @ rest
    return u


def _embed_pair(m: np.ndarray, q0: int, q1: int, k: int) -> np.ndarray:
    """Embed a 4x4 operator (local index b0 + 2*b1) on qubits (q0, q1) of k."""
    unit = {}
    for a in range(2):
        for b in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[a, b] = 1
            unit[a, b] = e
    out = np.zeros((1 << k, 1 << k), dtype=complex)
    for r in range(4):
        for c in range(4):
            if m[r, c] == 0:
                continue
            factors = [I2] * k
            factors[q0] = unit[r & 1, c & 1]
            factors[q1] = unit[r >> 1, c >> 1]
            out += m[r, c] * kron_lsb(*factors)
    return out


def dense_v() -> np.ndarray:
    """V = (H x H) CZ (I x H) with the first factor on the least significant qubit."""
    return kron_lsb(HAD, HAD) @ CZ4 @ kron_lsb(I2, HAD)


def basis_ket(bits: tuple[int, ...]) -> np.ndarray:
    """|b_0 b_1 ...> with b_0 on qubit 0."""
    v = np.zeros(1 << len(bits), dtype=complex)
    v[sum(b << i for i, b in enumerate(bits))] = 1
    return v


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - |<a,b>| / (|a||b|) for vectors, 1 - |tr(a^dagger b)|/dim for matrices."""
    if a.ndim == 1:
        return float(1 - abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(1 - abs(np.trace(a.conj().T @ b)) / a.shape[0])


def unitarity_error(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class UQCMReference:
    M: int
    eta: float
    fidelity: float
    chsh: float


def uqcm_reference(M: int) -> UQCMReference:
    """Single-clone marginal of the optimal symmetric 1 -> M cloner."""
    if M < 2:
        raise ValueError("M must be >= 2")
    eta = (M + 2) / (3 * M)
    return UQCMReference(M, eta, (M + 1) / (2 * M), eta * 2 * math.sqrt(2))
