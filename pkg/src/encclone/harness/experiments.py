"""Drivers for the four cloning experiments and the two supplementary scans.

Sampled estimates come from one of two equivalent routes.  When the backend
can hand out the reduced state of the measured qubits (statevector, density)
the basis change is applied to that state and outcomes are drawn from its
diagonal.  Otherwise the outcome statistics are rebuilt from exact Pauli
expectations: the Z-basis distribution by a Walsh-Hadamard transform of all
Z-string expectations, and each rotated-parity setting as a +-1 variable with
the exact mean.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from ..circuit import Circuit, CircuitBuilder, layer_metrics
from ..estimators import (
    CHSH_SETTINGS,
    FidelityEstimate,
    POMData,
    bell_fidelity,
    bsm_circuit,
    bsm_fidelity,
    chsh_estimate,
    chsh_from_paulis,
    chsh_rotation,
    pom_exact,
    pom_fidelity,
    pom_settings,
    witness_and_floor,
)
from ..noise import NoiseParams
from ..protocol import (
    ANCILLA,
    QubitLayout,
    build_decryption,
    build_encryption,
    build_experiment4,
    build_pipeline,
    plan_iterated,
    prepare_register,
)
from ..qsim.counts import CountsTable
from ..qsim.paulis import PauliString
from ..qsim.statevector import sample_distribution
from .config import ExperimentConfig
from .engine import Evaluation, evaluate, point_seed, rotate_reduced

DENSE_READOUT_LIMIT = 6  # measured qubits for which reduced states are used directly


# ---------------------------------------------------------------------------
# sampling helpers


def _z_index_bits(k: int) -> np.ndarray:
    idx = np.arange(1 << k)
    return ((idx[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform of a length-2^k vector."""
    v = np.array(v, dtype=float)
    k = int(round(math.log2(len(v))))
    t = v.reshape((2,) * k) if k else v
    for ax in range(k):
        a = np.take(t, 0, axis=ax)
        b = np.take(t, 1, axis=ax)
        t = np.stack([a + b, a - b], axis=ax)
    return t.reshape(-1)


def z_distribution(expect_batch: Callable, k: int) -> np.ndarray:
    """Z-basis outcome distribution (bit i = measured qubit i) from Z-string expectations."""
    bits = _z_index_bits(k)
    ez = expect_batch(np.zeros_like(bits), bits)
    # p(b) = 2^-k sum_S (-1)^{b.S} <Z_S>; index S has bit i for qubit i, so the
    # transform over the reshaped axes (most significant first) is consistent
    p = walsh_hadamard(ez) / (1 << k)
    return np.clip(p, 0, None)


def _has_dense(ev: Evaluation, k: int) -> bool:
    return ev.backend in ("statevector", "density") and k <= DENSE_READOUT_LIMIT


def measure_z(ev: Evaluation, qubits: Sequence[int], shots: int, seed: int) -> CountsTable:
    qubits = list(qubits)
    k = len(qubits)
    if _has_dense(ev, k):
        rho = ev.reduced(qubits)
        probs = np.real(np.diag(rho.entries))
    else:
        probs = z_distribution(ev.expect_batch_on(qubits), k)
    return sample_distribution(probs, qubits, shots, seed)


def sample_parity(mean: float, shots: int, rng: np.random.Generator) -> float:
    """Sample mean of `shots` +-1 outcomes with expectation ``mean``."""
    p = min(1.0, max(0.0, (1 + mean) / 2))
    k = rng.binomial(shots, p)
    return (2 * k - shots) / shots


def sampled_pom(ev: Evaluation, qubits: Sequence[int], r: int, shots: int, seed: int) -> FidelityEstimate:
    qubits = list(qubits)
    if len(qubits) != r:
        raise ValueError("POM needs one measured qubit per GHZ party")
    seeds = np.random.SeedSequence(seed).spawn(r + 1)
    z_counts = measure_z(ev, qubits, shots, int(seeds[0].generate_state(1)[0]))
    E = []
    if _has_dense(ev, r):
        rho = ev.reduced(qubits)
        for st, ss in zip(pom_settings(r), seeds[1:]):
            rot = rotate_reduced(rho, st.rotation(range(r), r))
            probs = np.real(np.diag(rot.entries))
            ct = sample_distribution(probs, qubits, shots, int(ss.generate_state(1)[0]))
            E.append(ct.parity_expectation())
    else:
        fn = ev.expect_batch_on(qubits)
        for st, ss in zip(pom_settings(r), seeds[1:]):
            x, z, w = st.pauli_expansion(r)
            mean = float(np.dot(w, fn(x, z)))
            E.append(sample_parity(mean, shots, np.random.default_rng(ss)))
    return pom_fidelity(POMData(z_counts, E, r, shots))


def exact_bell(ev: Evaluation, a: int, b: int) -> tuple[float, float]:
    n = ev.circuit.num_qubits
    obs = [PauliString.from_sparse(n, {a: p, b: p}) for p in "XYZ"]
    vals, sig = ev.expectations(obs)
    f = bell_fidelity(*vals)
    return min(1.0, max(0.0, float(f))), float(np.sqrt(np.sum(np.square(sig))) / 4)


def _noise_for(cfg: ExperimentConfig, seed: int) -> Optional[NoiseParams]:
    if cfg.noise is None:
        return None
    return cfg.noise.jittered(np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# Experiment 1: entanglement fidelity versus n


def run_experiment1(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for n in cfg.n_values:
        c, layout = build_pipeline(n)
        a, s = layout[ANCILLA], layout["S1"]
        num = c.num_qubits
        pseed = point_seed(cfg.seed, "exp1", n)
        noise = _noise_for(cfg, pseed)
        bsm_c = c + bsm_circuit(a, s, num)
        m_bsm = layer_metrics(bsm_c, noise.durations if noise else None)
        m_pom = layer_metrics(c, noise.durations if noise else None)
        ev_b = evaluate(bsm_c, cfg.backend, noise, pseed)
        bsm = bsm_fidelity(measure_z(ev_b, [a, s], cfg.shots, pseed))
        ev = evaluate(c, cfg.backend, noise, pseed)
        pom = sampled_pom(ev, [a, s], 2, cfg.shots, pseed + 1)
        fe, _ = exact_bell(ev, a, s)
        rows.append({
            "n": n, "N_qubits": num,
            "L2q_bsm": m_bsm.two_qubit_layers, "Fe_bsm": bsm.value, "sigma_bsm": bsm.sigma,
            "L2q_pom": m_pom.two_qubit_layers, "Fe_pom": pom.value, "sigma_pom": pom.sigma,
            "N2q": m_pom.two_qubit_gates, "Fe_exact": fe, "backend": ev.backend,
        })
    return rows


# ---------------------------------------------------------------------------
# Experiment 2: CHSH under three readout orderings


def scenario_circuit(n: int, scenario: str) -> tuple[Circuit, int, int]:
    """Protocol circuit with MEASURE markers placed per scenario.

    Returns the circuit and the (A~, clone) qubit pair.  Sequential readouts
    are separated by a zero-length IDLE on the later qubit so the two
    measurements occupy consecutive layers instead of one shared layer.
    """
    layout = QubitLayout.standard(n)
    num = layout.num_qubits
    a = layout[ANCILLA]
    b = CircuitBuilder(num, layout)
    b.extend(prepare_register(layout))
    b.extend(build_encryption(n, layout))
    if scenario == "undecrypted":
        if n < 2:
            raise ValueError("the undecrypted comparison uses clone S2 (n >= 2)")
        s = layout["S2"]
        b.measure(a).measure(s)
        return b.build(), a, s
    s = layout["S1"]
    dec = build_decryption(n, layout)
    if scenario == "2-1":
        b.measure(a)
        b.extend(dec)
        b.measure(s)
    elif scenario == "2-2":
        b.extend(dec)
        b.measure(a).measure(s)
    elif scenario == "2-3":
        b.extend(dec)
        b.measure(s).idle(0.0, a).measure(a)
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    return b.build(), a, s


def chsh_for(ev: Evaluation, a: int, s: int, scenario: str, shots: int, seed: int):
    num = ev.circuit.num_qubits
    pairs = [PauliString.from_sparse(num, {a: x, s: y}) for x, y in ("ZZ", "ZX", "XZ", "XX")]
    vals, _ = ev.expectations(pairs)
    exact = chsh_estimate(chsh_from_paulis(*vals), scenario)
    rng_seeds = np.random.SeedSequence(seed).spawn(4)
    corrs = []
    if _has_dense(ev, 2):
        rho = ev.reduced([a, s])
        for (basis, sign), ss in zip(CHSH_SETTINGS, rng_seeds):
            rb = CircuitBuilder(2)
            chsh_rotation(basis, sign, 0, 1, rb)
            rot = rotate_reduced(rho, rb.build())
            ct = sample_distribution(np.real(np.diag(rot.entries)), [a, s], shots, int(ss.generate_state(1)[0]))
            corrs.append(ct.parity_expectation())
    else:
        for mean, ss in zip(chsh_from_paulis(*vals), rng_seeds):
            corrs.append(sample_parity(mean, shots, np.random.default_rng(ss)))
    return chsh_estimate(corrs, scenario, shots), exact


def run_experiment2(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for n in cfg.n_values:
        for sc in cfg.scenarios:
            c, a, s = scenario_circuit(n, sc)
            pseed = point_seed(cfg.seed, "exp2", n, sc)
            noise = _noise_for(cfg, point_seed(cfg.seed, "exp2-noise", n))
            ev = evaluate(c, cfg.backend, noise, pseed)
            est, exact = chsh_for(ev, a, s, sc, cfg.shots, pseed)
            rows.append({"n": n, "N_qubits": c.num_qubits, "scenario": sc, "S": est.S, "sigma": est.sigma,
                         "S_exact": exact.S, "backend": ev.backend})
    return rows


# ---------------------------------------------------------------------------
# Experiment 3: iterated cloning


def run_experiment3(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    n_values = [n for n in cfg.n_values if n % 2 == 0] or [2]
    for n in n_values:
        for l in cfg.l_values:
            plan = plan_iterated(n, l, cfg.strategy, extra=cfg.extra)
            c = plan.full_circuit
            pseed = point_seed(cfg.seed, "exp3", n, l, cfg.strategy, cfg.extra)
            noise = _noise_for(cfg, pseed)
            ev = evaluate(c, cfg.backend, noise, pseed)
            fe, sig = exact_bell(ev, plan.layout[ANCILLA], plan.target_qubit)
            m = layer_metrics(c, noise.durations if noise else None)
            rows.append({
                "n": n, "l": l, "strategy": cfg.strategy, "extra": len(plan.extra), "N_qubits": plan.total_qubits,
                "clones": plan.clone_count, "virtual_clones": plan.virtual_clone_count, "key_size": plan.key_size,
                "L2q": m.two_qubit_layers, "N2q": m.two_qubit_gates, "Fe": fe, "sigma": sig,
                "method": "trajectory" if ev.backend == "tableau-trajectory" and cfg.noisy else "exact",
                "backend": ev.backend,
            })
    return rows


# ---------------------------------------------------------------------------
# Experiment 4: parallel cloning of GHZ states


def run_experiment4(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for r in cfg.r_values:
        c, layout, targets = build_experiment4(r)
        pseed = point_seed(cfg.seed, "exp4", r)
        noise = _noise_for(cfg, pseed)
        ev = evaluate(c, cfg.backend, noise, pseed)
        exact, _ = pom_exact(ev.expect_batch_on(targets), r)
        est = sampled_pom(ev, targets, r, cfg.shots, pseed)
        m = layer_metrics(c, noise.durations if noise else None)
        rows.append({
            "r": r, "N_qubits": c.num_qubits, "L2q": m.two_qubit_layers, "N2q": m.two_qubit_gates,
            "Fr": est.value, "sigma": est.sigma, "Fr_exact": exact.value, "label": witness_and_floor(est, r),
            "backend": ev.backend,
        })
    return rows


# ---------------------------------------------------------------------------
# supplementary scans


def _stage_circuits(n: int):
    layout = QubitLayout.standard(n)
    prep = prepare_register(layout)
    enc = prep + build_encryption(n, layout)
    dec = enc + build_decryption(n, layout)
    return layout, (("before-encryption", prep), ("after-encryption", enc), ("after-decryption", dec))


def _scan_roles(layout: QubitLayout) -> list[str]:
    return [r for r in layout.roles if r != ANCILLA]


def run_correlation_scan(cfg: ExperimentConfig) -> list[dict]:
    """|T_ij| = |<sigma_i(A~) sigma_j(q)>| for every other qubit q."""
    rows = []
    for n in cfg.n_values:
        layout, stages = _stage_circuits(n)
        a = layout[ANCILLA]
        for stage, c in stages:
            ev = evaluate(c.widened(layout.num_qubits), cfg.backend, _noise_for(cfg, point_seed(cfg.seed, "corr", n)),
                          point_seed(cfg.seed, "corr", n, stage))
            for role in _scan_roles(layout):
                q = layout[role]
                obs = [PauliString.from_sparse(layout.num_qubits, {a: x, q: y}) for x in "XYZ" for y in "XYZ"]
                vals, _ = ev.expectations(obs)
                row = {"n": n, "stage": stage, "role": role}
                for k, v in enumerate(vals):
                    row[f"T{k // 3 + 1}{k % 3 + 1}"] = abs(float(v))
                rows.append(row)
    return rows


def run_mixedness(cfg: ExperimentConfig) -> list[dict]:
    """Bloch vector and purity of every single qubit after encryption and decryption."""
    rows = []
    for n in cfg.n_values:
        layout, stages = _stage_circuits(n)
        for stage, c in stages[1:]:
            ev = evaluate(c, cfg.backend, _noise_for(cfg, point_seed(cfg.seed, "mix", n)),
                          point_seed(cfg.seed, "mix", n, stage))
            for role in layout.roles:
                q = layout[role]
                obs = [PauliString.from_sparse(layout.num_qubits, {q: p}) for p in "XYZ"]
                vals, _ = ev.expectations(obs)
                bx, by, bz = (float(v) for v in vals)
                rows.append({"n": n, "stage": stage, "role": role, "bloch_x": bx, "bloch_y": by, "bloch_z": bz,
                             "purity": (1 + bx * bx + by * by + bz * bz) / 2})
    return rows


DRIVERS = {
    "exp1": run_experiment1,
    "exp2": run_experiment2,
    "exp3": run_experiment3,
    "exp4": run_experiment4,
    "corr-scan": run_correlation_scan,
    "mixedness": run_mixedness,
}


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    return DRIVERS[cfg.experiment](cfg)
