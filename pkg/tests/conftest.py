import math

import numpy as np
from hypothesis import strategies as st

from encclone.circuit import Circuit, Op
from encclone import gates as g

CLIFFORD_1Q = [g.H, g.X, g.Z, g.S, g.SDG, g.SX, g.RZ(math.pi / 2), g.RZ(math.pi)]
CLIFFORD_2Q = [g.CNOT, g.CZ]
ANGLES = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


@st.composite
def clifford_circuits(draw, min_qubits=1, max_qubits=6, max_ops=30):
    n = draw(st.integers(min_qubits, max_qubits))
    ops = []
    for _ in range(draw(st.integers(0, max_ops))):
        if n >= 2 and draw(st.booleans()):
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            ops.append(Op(draw(st.sampled_from(CLIFFORD_2Q)), (a, b)))
        else:
            ops.append(Op(draw(st.sampled_from(CLIFFORD_1Q)), (draw(st.integers(0, n - 1)),)))
    return Circuit(n, ops)


@st.composite
def general_circuits(draw, max_qubits=5, max_ops=25):
    """Clifford gates plus arbitrary-angle RZ."""
    n = draw(st.integers(1, max_qubits))
    ops = []
    for _ in range(draw(st.integers(0, max_ops))):
        kind = draw(st.integers(0, 2))
        if kind == 0 and n >= 2:
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            ops.append(Op(draw(st.sampled_from(CLIFFORD_2Q)), (a, b)))
        elif kind == 1:
            ops.append(Op(g.RZ(draw(ANGLES)), (draw(st.integers(0, n - 1)),)))
        else:
            ops.append(Op(draw(st.sampled_from(CLIFFORD_1Q)), (draw(st.integers(0, n - 1)),)))
    return Circuit(n, ops)


def haar_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)
