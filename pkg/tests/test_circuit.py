import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import clifford_circuits, general_circuits
from encclone import gates as g
from encclone.circuit import (
    NATIVE_KINDS,
    Circuit,
    CircuitBuilder,
    GateDurations,
    Op,
    circuit_unitary,
    dumps,
    equal_up_to_phase,
    layer_metrics,
    loads,
    lower_to_native,
    schedule,
    total_duration,
)
from encclone.protocol import QubitLayout, bell_prep, build_decryption, build_encryption


def unitary_of(*ops, n=1):
    return circuit_unitary(Circuit(n, [Op(gt, q) for gt, q in ops]))


# -- gate and circuit types -------------------------------------------------

def test_gate_invariants():
    with pytest.raises(ValueError):
        g.RZ(math.inf)
    with pytest.raises(ValueError):
        g.IDLE(-1.0)
    with pytest.raises(ValueError):
        g.Gate("TOFFOLI")
    with pytest.raises(ValueError):
        g.Gate("H", 1.0)


def test_circuit_range_and_measure_checks():
    with pytest.raises(IndexError):
        CircuitBuilder(2).h(2).build()
    with pytest.raises(ValueError):
        CircuitBuilder(2).measure(0).h(0).build()
    CircuitBuilder(2).measure(0).h(1).measure(1).build()


# -- lowering ---------------------------------------------------------------

def test_h_lowering_sequence_is_unitary_equivalent():
    low = lower_to_native(CircuitBuilder(1).h(0).build())
    assert [op.gate.kind for op in low.ops] == ["RZ", "SX", "RZ"]
    assert equal_up_to_phase(circuit_unitary(low), g.gate_matrix(g.H)) < 1e-12


def test_printed_h_identity_is_not_hadamard():
    # RZ(pi/2).SX.RZ(pi) in either application order misses H
    for order in ((math.pi / 2, math.pi), (math.pi, math.pi / 2)):
        u = unitary_of((g.RZ(order[0]), (0,)), (g.SX, (0,)), (g.RZ(order[1]), (0,)))
        assert equal_up_to_phase(u, g.gate_matrix(g.H)) > 0.1


def test_cnot_lowering():
    c = CircuitBuilder(2).cnot(0, 1).build()
    low = lower_to_native(c)
    assert low.count("CZ") == 1 and set(op.gate.kind for op in low.ops) <= NATIVE_KINDS
    assert equal_up_to_phase(circuit_unitary(low), circuit_unitary(c)) < 1e-12


def test_s_lowering():
    low = lower_to_native(CircuitBuilder(1).s(0).build())
    assert [(op.gate.kind, op.gate.param) for op in low.ops] == [("RZ", math.pi / 2)]


@settings(max_examples=60, deadline=None)
@given(general_circuits(max_qubits=6))
def test_lowering_soundness(c):
    low = lower_to_native(c)
    assert all(op.gate.kind in NATIVE_KINDS for op in low.ops)
    assert equal_up_to_phase(circuit_unitary(low), circuit_unitary(c)) < 1e-9


def test_lowering_of_protocol_circuits():
    for n in (1, 2, 3):
        layout = QubitLayout.standard(n)
        c = build_encryption(n, layout) + build_decryption(n, layout)
        assert equal_up_to_phase(circuit_unitary(lower_to_native(c)), circuit_unitary(c)) < 1e-9


# -- metrics ----------------------------------------------------------------

def test_disjoint_czs_share_a_layer():
    m = layer_metrics(CircuitBuilder(4).cz(0, 1).cz(2, 3).build())
    assert (m.two_qubit_layers, m.two_qubit_gates) == (1, 2)


def test_bell_prep_metrics():
    m = layer_metrics(bell_prep(0, 1, 2))
    assert (m.two_qubit_layers, m.two_qubit_gates) == (1, 1)


def test_encryption_n2_has_eight_two_qubit_gates():
    assert layer_metrics(build_encryption(2, QubitLayout.standard(2))).two_qubit_gates == 8


def test_durations():
    assert total_duration(Circuit(1)) == 0
    assert total_duration(CircuitBuilder(1).idle(3.0, 0).build()) == pytest.approx(3.0)
    dec = build_decryption(2, QubitLayout.standard(2))
    t = total_duration(dec)
    assert 0.1 <= t <= 10  # order of a microsecond
    with pytest.raises(KeyError):
        total_duration(CircuitBuilder(1).h(0).build(), {"X": 1.0})


def test_custom_durations():
    c = CircuitBuilder(2).h(0).cnot(0, 1).measure(0).build()
    assert total_duration(c, GateDurations(1.0, 2.0, 5.0)) == pytest.approx(8.0)


@settings(max_examples=60, deadline=None)
@given(clifford_circuits(min_qubits=2, max_qubits=6), st.data())
def test_metric_monotonicity(c, data):
    before = layer_metrics(c)
    a, b = data.draw(st.lists(st.integers(0, c.num_qubits - 1), min_size=2, max_size=2, unique=True))
    after = layer_metrics(c + CircuitBuilder(c.num_qubits).cz(a, b).build())
    assert after.two_qubit_layers >= before.two_qubit_layers
    assert after.two_qubit_gates == before.two_qubit_gates + 1
    assert 0 <= after.two_qubit_layers <= after.two_qubit_gates


@settings(max_examples=60, deadline=None)
@given(clifford_circuits(max_qubits=6))
def test_schedule_validity(c):
    layers = schedule(c)
    seen = sorted(i for layer in layers for i in layer)
    assert seen == list(range(len(c)))
    for layer in layers:
        qs = [q for i in layer for q in c.ops[i].qubits]
        assert len(qs) == len(set(qs))
    # per-qubit order respected
    where = {i: k for k, layer in enumerate(layers) for i in layer}
    for q in range(c.num_qubits):
        idx = [i for i, op in enumerate(c.ops) if q in op.qubits]
        assert all(where[a] < where[b] for a, b in zip(idx, idx[1:]))


def test_measure_is_barrier():
    c = CircuitBuilder(3).h(0).measure(0).measure(1).h(2).build()
    layers = schedule(c)
    assert layers[1] == [1, 2]  # consecutive measurements share a layer
    assert layers[2] == [3]


# -- serialisation ----------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(general_circuits())
def test_text_round_trip(c):
    c2, header = loads(dumps(c, ["hello"]))
    assert header == ["hello"]
    assert c2 == c


def test_text_format_lines():
    c = CircuitBuilder(2).h(0).cnot(0, 1).rz(0.5, 1).idle(3.0, 0).build()
    text = dumps(c)
    assert text.splitlines() == ["QUBITS 2", "H 0", "CNOT 0 1", "RZ 1 0.5", "IDLE 0 3.0"]


def test_inverse():
    c = CircuitBuilder(2).h(0).s(0).sx(1).rz(0.3, 1).cnot(0, 1).build()
    u = circuit_unitary(c + c.inverse())
    assert equal_up_to_phase(u, np.eye(4)) < 1e-12
