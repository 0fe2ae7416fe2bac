"""Circuit representation, native lowering, scheduling and layer metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Optional

import numpy as np

from . import gates as g
from .gates import Gate, gate_matrix

NATIVE_KINDS = {"RZ", "SX", "X", "CZ", "IDLE", "MEASURE"}


@dataclass(frozen=True)
class Op:
    gate: Gate
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.gate.arity:
            raise ValueError(f"{self.gate.kind} expects {self.gate.arity} target(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated targets {self.qubits}")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    ops: tuple[Op, ...] = ()
    layout: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        measured: set[int] = set()
        for op in self.ops:
            for q in op.qubits:
                if not 0 <= q < self.num_qubits:
                    raise IndexError(f"qubit {q} out of range for {self.num_qubits} qubits")
                if q in measured:
                    raise ValueError(f"qubit {q} used after MEASURE")
            if op.gate.kind == "MEASURE":
                measured.update(op.qubits)

    def __add__(self, other: "Circuit") -> "Circuit":
        n = max(self.num_qubits, other.num_qubits)
        return Circuit(n, self.ops + other.ops, self.layout or other.layout)

    def __len__(self):
        return len(self.ops)

    def with_layout(self, layout) -> "Circuit":
        return Circuit(self.num_qubits, self.ops, layout)

    def widened(self, num_qubits: int) -> "Circuit":
        return Circuit(num_qubits, self.ops, self.layout)

    def remap(self, mapping, num_qubits: int) -> "Circuit":
        """Relabel qubits through ``mapping`` (sequence or dict)."""
        ops = [Op(op.gate, tuple(mapping[q] for q in op.qubits)) for op in self.ops]
        return Circuit(num_qubits, ops, None)

    def inverse(self) -> "Circuit":
        ops = []
        for op in reversed(self.ops):
            k = op.gate.kind
            if k == "MEASURE":
                raise ValueError("cannot invert a circuit containing MEASURE")
            if k == "S":
                ops.append(Op(g.SDG, op.qubits))
            elif k == "SDG":
                ops.append(Op(g.S, op.qubits))
            elif k == "RZ":
                ops.append(Op(g.RZ(-op.gate.param), op.qubits))
            elif k == "SX":
                # SX^dagger = X SX (SX applied first)
                ops.append(Op(g.SX, op.qubits))
                ops.append(Op(g.X, op.qubits))
            else:
                ops.append(op)
        return Circuit(self.num_qubits, ops, self.layout)

    def is_clifford(self) -> bool:
        return all(op.gate.is_clifford() for op in self.ops)

    def count(self, kind: str) -> int:
        return sum(1 for op in self.ops if op.gate.kind == kind)

    def two_qubit_count(self) -> int:
        return sum(1 for op in self.ops if op.gate.is_two_qubit)

    def touched(self) -> set[int]:
        return {q for op in self.ops for q in op.qubits}


class CircuitBuilder:
    """Mutable accumulator; ``build()`` freezes it into a Circuit."""

    def __init__(self, num_qubits: int, layout=None):
        self.num_qubits = num_qubits
        self.layout = layout
        self.ops: list[Op] = []

    def add(self, gate: Gate, *qubits: int) -> "CircuitBuilder":
        self.ops.append(Op(gate, qubits))
        return self

    def extend(self, circuit: Circuit) -> "CircuitBuilder":
        self.ops.extend(circuit.ops)
        return self

    def h(self, q):
        return self.add(g.H, q)

    def x(self, q):
        return self.add(g.X, q)

    def z(self, q):
        return self.add(g.Z, q)

    def s(self, q):
        return self.add(g.S, q)

    def sdg(self, q):
        return self.add(g.SDG, q)

    def sx(self, q):
        return self.add(g.SX, q)

    def rz(self, theta, q):
        return self.add(g.RZ(theta), q)

    def cnot(self, c, t):
        return self.add(g.CNOT, c, t)

    def cz(self, a, b):
        return self.add(g.CZ, a, b)

    def idle(self, duration, q):
        return self.add(g.IDLE(duration), q)

    def measure(self, q):
        return self.add(g.MEASURE, q)

    def build(self) -> Circuit:
        return Circuit(self.num_qubits, tuple(self.ops), self.layout)


# ---------------------------------------------------------------------------
# lowering

_H_NATIVE = (g.RZ(math.pi / 2), g.SX, g.RZ(math.pi / 2))


def _lower_op(op: Op) -> list[Op]:
    k = op.gate.kind
    if k in NATIVE_KINDS:
        return [op]
    q = op.qubits
    if k == "H":
        return [Op(gg, q) for gg in _H_NATIVE]
    if k == "Z":
        return [Op(g.RZ(math.pi), q)]
    if k == "S":
        return [Op(g.RZ(math.pi / 2), q)]
    if k == "SDG":
        return [Op(g.RZ(-math.pi / 2), q)]
    if k == "CNOT":
        c, t = q
        seq = [Op(g.H, (t,)), Op(g.CZ, (c, t)), Op(g.H, (t,))]
        return [low for o in seq for low in _lower_op(o)]
    raise ValueError(f"no native lowering for gate kind {k}")


def lower_to_native(c: Circuit) -> Circuit:
    """Rewrite into {RZ, SX, X, CZ, IDLE, MEASURE}; equal up to global phase."""
    return Circuit(c.num_qubits, [low for op in c.ops for low in _lower_op(op)], c.layout)


# ---------------------------------------------------------------------------
# scheduling and metrics


@dataclass(frozen=True)
class GateDurations:
    """Durations in microseconds.  Defaults are configuration, not calibration data."""

    one_qubit: float = 0.032
    two_qubit: float = 0.068
    measure: float = 3.0

    def table(self) -> dict[str, float]:
        t = {k: self.one_qubit for k in g.ONE_QUBIT}
        t.update({k: self.two_qubit for k in g.TWO_QUBIT})
        t["MEASURE"] = self.measure
        return t


DEFAULT_DURATIONS = GateDurations()


def op_duration(op: Op, timing: dict[str, float]) -> float:
    if op.gate.kind == "IDLE":
        return op.gate.param
    try:
        return timing[op.gate.kind]
    except KeyError:
        raise KeyError(f"no duration for gate kind {op.gate.kind}") from None


def schedule(c: Circuit) -> list[list[int]]:
    """Greedy as-soon-as-possible layers of op indices.

    MEASURE acts as a barrier: it starts after every earlier op and every later
    op starts after it.  Consecutive MEASUREs on distinct qubits share a layer.
    """
    layers: list[list[int]] = []
    ready = [0] * c.num_qubits  # first free layer per qubit
    floor = 0  # barrier from the last measurement layer
    last_measure_layer = None
    prev_was_measure = False
    for i, op in enumerate(c.ops):
        if op.gate.kind == "MEASURE":
            if prev_was_measure and all(ready[q] <= last_measure_layer for q in op.qubits):
                layer = last_measure_layer
            else:
                layer = max([floor] + ready)
            last_measure_layer = layer
            prev_was_measure = True
            floor = layer + 1
        else:
            layer = max([floor] + [ready[q] for q in op.qubits])
            prev_was_measure = False
        while len(layers) <= layer:
            layers.append([])
        layers[layer].append(i)
        for q in op.qubits:
            ready[q] = layer + 1
    return layers


@dataclass(frozen=True)
class LayerMetrics:
    two_qubit_layers: int
    two_qubit_gates: int
    total_duration: float


def total_duration(c: Circuit, timing: dict[str, float] | GateDurations | None = None) -> float:
    """Sum over ASAP layers of the longest op duration in each layer (µs)."""
    if timing is None:
        timing = DEFAULT_DURATIONS
    if isinstance(timing, GateDurations):
        timing = timing.table()
    tot = 0.0
    for layer in schedule(c):
        tot += max(op_duration(c.ops[i], timing) for i in layer)
    return tot


def layer_metrics(c: Circuit, timing: dict[str, float] | GateDurations | None = None) -> LayerMetrics:
    layers = schedule(c)
    l2q = sum(1 for layer in layers if any(c.ops[i].gate.is_two_qubit for i in layer))
    return LayerMetrics(l2q, c.two_qubit_count(), total_duration(c, timing))


# ---------------------------------------------------------------------------
# dense unitary (independent of the simulator kernels)


def embed(num_qubits: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Kronecker product of single-qubit operators; identity elsewhere."""
    eye = np.eye(2, dtype=complex)
    mats = [ops.get(q, eye) for q in reversed(range(num_qubits))]
    return reduce(np.kron, mats)


def _two_qubit_dense(num_qubits: int, u: np.ndarray, q0: int, q1: int) -> np.ndarray:
    """Expand a local 4x4 (index b0 + 2*b1) via its operator-basis decomposition."""
    units = {(a, b): np.zeros((2, 2), dtype=complex) for a in range(2) for b in range(2)}
    for (a, b), m in units.items():
        m[a, b] = 1
    out = np.zeros((1 << num_qubits,) * 2, dtype=complex)
    for r in range(4):
        for col in range(4):
            if u[r, col] == 0:
                continue
            r0, r1 = r & 1, r >> 1
            c0, c1 = col & 1, col >> 1
            out += u[r, col] * embed(num_qubits, {q0: units[(r0, c0)], q1: units[(r1, c1)]})
    return out


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of a small circuit built by Kronecker products (<= ~10 qubits)."""
    n = c.num_qubits
    u = np.eye(1 << n, dtype=complex)
    for op in c.ops:
        if op.gate.is_marker:
            if op.gate.kind == "MEASURE":
                raise ValueError("circuit_unitary: MEASURE is not unitary")
            continue
        m = gate_matrix(op.gate)
        if op.gate.arity == 1:
            full = embed(n, {op.qubits[0]: m})
        else:
            full = _two_qubit_dense(n, m, *op.qubits)
        u = full @ u
    return u


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Deviation 1 - |tr(a^dagger b)|/dim (0 when equal up to global phase)."""
    return float(abs(1 - abs(np.trace(a.conj().T @ b)) / a.shape[0]))


# ---------------------------------------------------------------------------
# text serialisation: one op per line, ``GATE q0 [q1] [theta|duration]``


def _fmt_param(p: float) -> str:
    return repr(float(p))


def dumps(c: Circuit, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append(f"QUBITS {c.num_qubits}")
    for op in c.ops:
        parts = [op.gate.kind] + [str(q) for q in op.qubits]
        if op.gate.param is not None:
            parts.append(_fmt_param(op.gate.param))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def loads(text: str) -> tuple[Circuit, list[str]]:
    """Parse the text format; returns the circuit and the ``#`` header lines."""
    header: list[str] = []
    num_qubits = None
    ops: list[Op] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header.append(line[1:].strip())
            continue
        parts = line.split()
        kind = parts[0].upper()
        if kind == "QUBITS":
            num_qubits = int(parts[1])
            continue
        try:
            if kind in g.PARAMETRIC:
                gate = Gate(kind, float(parts[-1]))
                qubits = tuple(int(p) for p in parts[1:-1])
            else:
                gate = Gate(kind)
                qubits = tuple(int(p) for p in parts[1:])
            ops.append(Op(gate, qubits))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    if num_qubits is None:
        num_qubits = 1 + max((q for op in ops for q in op.qubits), default=0)
    return Circuit(num_qubits, ops), header
