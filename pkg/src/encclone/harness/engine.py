"""Backend dispatch for the experiment drivers.

Every driver asks for one of two things: Pauli expectations on the final state,
or shot samples of a small set of measured qubits.  Backends:

statevector         noiseless dense simulation (<= 26 qubits)
density             noisy density matrix (<= 13 qubits)
tableau-trajectory  stabilizer tableau; noiseless exact, or Pauli trajectories
pauli-exact         exact noisy Pauli expectations for Clifford circuits
auto                picks one of the above per sweep point
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..circuit import Circuit
from ..noise import NoiseParams, execute_noisy, pauli_exact_batch, trajectory_tableaus
from ..qsim.density import DensityMatrix, dm_apply, dm_expect_pauli, dm_reduced
from ..qsim.paulis import PauliString
from ..qsim.statevector import DEFAULT_MAX_QUBITS, CapacityError, sv_reduced, sv_run
from ..qsim.tableau import tab_expect_pauli, tab_reduced, tab_run

BACKEND_CHOICES = ("auto", "statevector", "density", "tableau-trajectory", "pauli-exact")
AUTO_DENSITY_LIMIT = 10
AUTO_STATEVECTOR_LIMIT = 20


def resolve_backend(backend: str, num_qubits: int, noise: Optional[NoiseParams], clifford: bool = True) -> str:
    if backend not in BACKEND_CHOICES:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKEND_CHOICES}")
    noisy = noise is not None and not noise.is_noiseless
    if backend == "auto":
        if not noisy:
            if num_qubits <= AUTO_STATEVECTOR_LIMIT or not clifford:
                return "statevector"
            return "tableau-trajectory"
        if num_qubits <= AUTO_DENSITY_LIMIT or not clifford:
            return "density"
        return "pauli-exact"
    if backend == "statevector" and noisy:
        raise ValueError("the statevector backend is noiseless; pick density, tableau-trajectory or pauli-exact")
    return backend


@dataclass
class Evaluation:
    """Final-state handle able to produce expectations and reduced states."""

    backend: str
    circuit: Circuit
    noise: Optional[NoiseParams]
    seed: int
    _state: object = None

    def _noise(self) -> NoiseParams:
        return self.noise if self.noise is not None else NoiseParams.noiseless()

    def expectations(self, observables: Sequence[PauliString]) -> tuple[np.ndarray, np.ndarray]:
        """Values and standard errors (zero except for trajectory averages)."""
        obs = list(observables)
        zero = np.zeros(len(obs))
        if self.backend == "statevector":
            qs = sorted({q for p in obs for q in p.support()})
            if not qs:
                return np.array([float(np.real(p.coefficient)) for p in obs]), zero
            red = self.reduced(qs)
            local = {q: i for i, q in enumerate(qs)}
            vals = []
            for p in obs:
                lp = PauliString.from_sparse(len(qs), {local[q]: p.ops[q] for q in p.support()}, p.coefficient)
                vals.append(dm_expect_pauli(red, lp))
            return np.array(vals), zero
        if self.backend == "tableau-trajectory" and self._noise().is_noiseless:
            tab = self._tableau()
            return np.array([tab_expect_pauli(tab, p) for p in obs]), zero
        if self.backend == "tableau-trajectory":
            res = execute_noisy(self.circuit, self._noise(), "trajectory", self.seed, observables=obs)
            return res.expectations, res.sigmas
        if self.backend == "density":
            dm = self._density()
            return np.array([dm_expect_pauli(dm, p) for p in obs]), zero
        if self.backend == "pauli-exact":
            res = execute_noisy(self.circuit, self._noise(), "pauli-exact", self.seed, observables=obs)
            return res.expectations, zero
        raise ValueError(self.backend)  # pragma: no cover

    def expect_batch_on(self, qubits: Sequence[int]):
        """Batched exact Pauli expectations restricted to ``qubits`` (for POM)."""
        qubits = list(qubits)
        n = self.circuit.num_qubits
        if self.backend == "tableau-trajectory" and self._noise().is_noiseless:
            return tab_reduced(self._tableau(), qubits).expect_batch
        if self.backend == "pauli-exact":
            def fn(bx, bz):
                fx = np.zeros((len(bx), n), dtype=np.uint8)
                fz = np.zeros((len(bz), n), dtype=np.uint8)
                fx[:, qubits] = bx
                fz[:, qubits] = bz
                return pauli_exact_batch(self.circuit, self._noise(), fx, fz)
            return fn
        if self.backend == "tableau-trajectory":
            tabs = [tab for tab, _ in trajectory_tableaus(self.circuit, self._noise(), self.seed)]

            def avg(bx, bz):
                return np.mean([tab_reduced(t, qubits).expect_batch(bx, bz) for t in tabs], axis=0)
            return avg
        if self.backend in ("statevector", "density"):
            from ..estimators import dense_expect_batch

            return dense_expect_batch(self.reduced(qubits).entries)
        raise ValueError(f"batched expectations are not available on {self.backend}")

    def reduced(self, qubits: Sequence[int]) -> DensityMatrix:
        if self.backend == "statevector":
            if self._state is None:
                self._state = sv_run(self.circuit)
            return sv_reduced(self._state, qubits)
        if self.backend == "density":
            return dm_reduced(self._density(), qubits)
        if self.backend == "tableau-trajectory" and self._noise().is_noiseless:
            g = tab_reduced(self._tableau(), qubits)
            return DensityMatrix(len(qubits), g.to_density())
        raise ValueError(f"reduced states are not available on {self.backend}")

    def _density(self) -> DensityMatrix:
        if self._state is None:
            self._state = execute_noisy(self.circuit, self._noise(), "density", self.seed).state
        return self._state

    def _tableau(self):
        if self._state is None:
            self._state = tab_run(self.circuit)
        return self._state


def evaluate(c: Circuit, backend: str, noise: Optional[NoiseParams], seed: int) -> Evaluation:
    chosen = resolve_backend(backend, c.num_qubits, noise, c.is_clifford())
    if chosen == "statevector" and c.num_qubits > DEFAULT_MAX_QUBITS:
        raise CapacityError(f"{c.num_qubits} qubits exceed the statevector limit of {DEFAULT_MAX_QUBITS}")
    return Evaluation(chosen, c, noise, seed)


def rotate_reduced(rho: DensityMatrix, rotation: Circuit) -> DensityMatrix:
    """Apply a local measurement-basis change to a reduced state."""
    out = rho.copy()
    for op in rotation.ops:
        dm_apply(out, op.gate, op.qubits)
    return out


def point_seed(seed: int, *key) -> int:
    """Deterministic per-sweep-point seed derived from the master seed."""
    ints = [int(seed)] + [abs(hash_int(k)) for k in key]
    return int(np.random.SeedSequence(ints).generate_state(1, dtype=np.uint64)[0] >> 1)


def hash_int(k) -> int:
    if isinstance(k, (int, np.integer)):
        return int(k)
    # stable across runs (no PYTHONHASHSEED dependence)
    return int.from_bytes(str(k).encode(), "little") % (2 ** 61)
