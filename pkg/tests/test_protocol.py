import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import haar_qubit
from encclone import gates
from encclone.circuit import Circuit
from encclone.estimators import bell_fidelity
from encclone.oracles import bell_state
from encclone.protocol import (
    ANCILLA,
    QubitLayout,
    bell_prep,
    build_decryption,
    build_encryption,
    build_experiment4,
    build_pipeline,
    decryption_circuit,
    ghz_prep,
    plan_from_text,
    plan_iterated,
    prepare_register,
    without_qubit,
)
from encclone.qsim.density import DensityMatrix, fidelity_with_pure
from encclone.qsim.paulis import PauliString
from encclone.qsim.statevector import StateVector, sv_apply, sv_expect_pauli, sv_init, sv_reduced, sv_run
from encclone.qsim.tableau import tab_expect_pauli, tab_run

SQ = 1 / math.sqrt(2)


def bell_fid_sv(state, a, s):
    n = state.num_qubits
    vals = [sv_expect_pauli(state, PauliString.from_sparse(n, {a: p, s: p})) for p in "XYZ"]
    return bell_fidelity(*vals)


def bell_fid_tab(tab, a, s):
    n = tab.num_qubits
    return bell_fidelity(*[tab_expect_pauli(tab, PauliString.from_sparse(n, {a: p, s: p})) for p in "XYZ"])


# -- preparation ------------------------------------------------------------

def test_bell_prep():
    s = sv_run(bell_prep(0, 1, 2))
    assert np.allclose(s.amplitudes, [SQ, 0, 0, SQ])
    assert sv_expect_pauli(s, PauliString("ZZ")) == pytest.approx(1)
    assert sv_expect_pauli(s, PauliString("XX")) == pytest.approx(1)
    assert fidelity_with_pure(DensityMatrix.from_statevector(s), StateVector.from_amplitudes(bell_state())) == pytest.approx(1)
    with pytest.raises(ValueError):
        bell_prep(1, 1, 2)


def test_ghz_prep():
    assert np.allclose(sv_run(ghz_prep([0], 1)).amplitudes, [SQ, SQ])
    assert np.allclose(sv_run(ghz_prep([0, 1], 2)).amplitudes, bell_state())
    g3 = sv_run(ghz_prep([0, 1, 2], 3))
    assert sv_expect_pauli(g3, PauliString("XXX")) == pytest.approx(1)
    assert sv_expect_pauli(g3, PauliString("ZZI")) == pytest.approx(1)
    with pytest.raises(ValueError):
        ghz_prep([])


# -- encryption -------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_encryption_is_clifford(n):
    layout = QubitLayout.standard(n)
    assert build_encryption(n, layout).is_clifford()
    assert build_decryption(n, layout).is_clifford()


def test_encryption_errors():
    with pytest.raises(ValueError):
        build_encryption(0, QubitLayout.standard(1))
    with pytest.raises((ValueError, KeyError)):
        build_encryption(3, QubitLayout.standard(2))


@pytest.mark.parametrize("n", [2, 4])
def test_encrypted_mixedness_and_no_correlation(n):
    layout = QubitLayout.standard(n)
    c = prepare_register(layout) + build_encryption(n, layout)
    st_ = sv_run(c)
    a = layout[ANCILLA]
    for role in layout.roles:
        q = layout[role]
        red = sv_reduced(st_, [q]).entries
        assert np.max(np.abs(red - np.eye(2) / 2)) < 1e-10
        if role in (ANCILLA, "A"):
            continue
        for x in "XYZ":
            for y in "XYZ":
                v = sv_expect_pauli(st_, PauliString.from_sparse(c.num_qubits, {a: x, q: y}))
                assert abs(v) < 1e-10


# -- decryption -------------------------------------------------------------

@pytest.mark.parametrize("j", [1, 2])
def test_pipeline_n2_recovers(j):
    c, layout = build_pipeline(2, j)
    assert bell_fid_sv(sv_run(c), layout[ANCILLA], layout[f"S{j}"]) == pytest.approx(1, abs=1e-9)


def test_decryption_j_range():
    with pytest.raises(ValueError):
        build_decryption(2, QubitLayout.standard(2), j=3)
    with pytest.raises(ValueError):
        decryption_circuit(0, [1, 2], 0, 3)


def test_incomplete_key_fails():
    layout = QubitLayout.standard(2)
    prep_enc = prepare_register(layout) + build_encryption(2, layout)
    dec = build_decryption(2, layout, 1)
    for role in ("N1", "N2"):
        dec_missing = without_qubit(dec, layout[role])
        f = bell_fid_sv(sv_run(prep_enc + dec_missing), layout[ANCILLA], layout["S1"])
        assert f < 1 - 1e-3


def test_decrypting_with_a_shorter_key_fails():
    layout = QubitLayout.standard(2)
    c = prepare_register(layout) + build_encryption(2, layout)
    c = c + decryption_circuit(layout["S1"], [layout["N1"]], 1, layout.num_qubits)
    assert bell_fid_sv(sv_run(c), layout[ANCILLA], layout["S1"]) < 1 - 1e-3


def _recovered_states(n, j, inputs):
    """Decrypted S_j state for each single-qubit input on A (no ancilla), by linearity."""
    layout = QubitLayout.standard(n, j)
    c = prepare_register(layout)
    # drop the A~/A Bell preparation: A carries the input instead
    a_t, a = layout[ANCILLA], layout["A"]
    rest = Circuit(c.num_qubits, [op for op in c.ops if a_t not in op.qubits and a not in op.qubits])
    body = rest + build_encryption(n, layout) + build_decryption(n, layout, j)
    outs = []
    for bit in (0, 1):
        s0 = sv_init(layout.num_qubits)
        if bit:
            s0 = sv_apply(s0, gates.X, [a])
        outs.append(sv_run(body, s0).amplitudes)
    res = []
    for v in inputs:
        amp = v[0] * outs[0] + v[1] * outs[1]
        res.append(sv_reduced(StateVector(layout.num_qubits, amp), [layout[f"S{j}"]]).entries)
    return res


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
def test_recovery_haar_inputs(n):
    rng = np.random.default_rng(100 + n)
    inputs = [haar_qubit(rng) for _ in range(50)]
    for j in range(1, n + 1):
        for v, rho in zip(inputs, _recovered_states(n, j, inputs)):
            assert abs(np.real(np.trace(rho @ rho)) - 1) < 1e-9
            assert abs(np.real(v.conj() @ rho @ v) - 1) < 1e-9


@pytest.mark.parametrize("n", range(1, 9))
def test_recovery_every_clone_tableau(n):
    for j in range(1, n + 1):
        c, layout = build_pipeline(n, j)
        assert bell_fid_tab(tab_run(c), layout[ANCILLA], layout[f"S{j}"]) == 1


# -- iteration --------------------------------------------------------------

def test_plan_examples():
    p0, p2 = plan_iterated(2, 0), plan_iterated(2, 2)
    assert (p0.clone_count, p0.total_qubits) == (3, 6)
    assert (p2.clone_count, p2.total_qubits) == (27, 54)
    sb = plan_iterated(2, 5, strategy="single-branch")
    assert (sb.total_qubits, sb.virtual_clone_count) == (26, 729)
    assert p2.exceeds_capacity and p2.notes
    assert not p0.exceeds_capacity


def test_plan_errors():
    with pytest.raises(ValueError):
        plan_iterated(3, 1)
    with pytest.raises(ValueError):
        plan_iterated(2, -1)
    with pytest.raises(ValueError):
        plan_iterated(2, 1, strategy="zigzag")


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 4, 6]), st.integers(0, 4))
def test_counting_laws(n, l):
    if (n + 1) ** (l + 1) > 3000:
        l = 1
    plan = plan_iterated(n, l)
    assert plan.clone_count == (n + 1) ** (l + 1)
    assert plan.key_size == n * (l + 1)
    assert plan.total_qubits == 2 + 2 * n * sum((n + 1) ** d for d in range(l + 1))
    sb = plan_iterated(n, l, strategy="single-branch")
    assert sb.virtual_clone_count == (n + 1) ** (l + 1)
    assert sb.total_qubits == 2 + 2 * n * (l + 1)
    assert sb.key_size == n * (l + 1)


@pytest.mark.parametrize("l", [0, 1, 2])
def test_decryption_touches_only_key(l):
    plan = plan_iterated(2, l)
    noise_roles = {plan.layout.roles[q] for q in plan.decryption.touched()} - {plan.layout.roles[plan.target_qubit]}
    assert all(r.startswith("N") for r in noise_roles)
    assert len(noise_roles) == plan.key_size


@pytest.mark.parametrize("kw", [{"l": 0}, {"l": 1}, {"l": 2}, {"l": 5, "strategy": "single-branch"},
                                {"l": 2, "extra": 11}, {"l": 2, "extra": 25}])
def test_iterated_recovery(kw):
    plan = plan_iterated(2, **kw)
    c = plan.full_circuit
    assert c.is_clifford()
    assert bell_fid_tab(tab_run(c), plan.layout[ANCILLA], plan.target_qubit) == 1


def test_iterated_recovery_all_targets_l1():
    for t0 in range(3):
        for t1 in range(3):
            plan = plan_iterated(2, 1, target=(t0, t1))
            assert bell_fid_tab(tab_run(plan.full_circuit), plan.layout[ANCILLA], plan.target_qubit) == 1


def test_plan_text_round_trip():
    plan = plan_iterated(2, 1)
    c, layout = plan_from_text(plan.to_text())
    assert c.ops == plan.full_circuit.ops
    assert layout.roles == plan.layout.roles


# -- experiment 4 -----------------------------------------------------------

def test_experiment4_sizes():
    assert build_experiment4(1)[0].num_qubits == 5
    assert build_experiment4(3)[0].num_qubits == 15


def test_experiment4_r3_recovers_ghz():
    c, layout, targets = build_experiment4(3)
    st_ = sv_run(c)
    red = sv_reduced(st_, targets).entries
    ghz = np.zeros(8, complex)
    ghz[0] = ghz[7] = SQ
    assert np.real(ghz.conj() @ red @ ghz) == pytest.approx(1, abs=1e-9)


def test_experiment4_r2_beats_uqcm_bound():
    c, layout, targets = build_experiment4(2)
    red = sv_reduced(sv_run(c), targets).entries
    f = np.real(bell_state().conj() @ red @ bell_state())
    assert f == pytest.approx(1, abs=1e-9) and f > 0.583
