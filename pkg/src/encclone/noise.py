"""Hardware-noise proxy: two-qubit depolarizing noise plus T1/T2 idle decay.

Noise is placed on the ASAP schedule of the circuit.  Every two-qubit gate is
followed by a depolarizing channel on its pair.  Within each layer, a qubit
that is active (it has seen its first op and has not yet been measured) idles
for the layer duration minus its own gate duration; IDLE ops count as idle
time.  MEASURE freezes a qubit: expectations are taken at the end of the
circuit, which equals the measurement-time value because nothing acts on the
qubit afterwards.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .circuit import Circuit, GateDurations, Op, op_duration, schedule
from .qsim.counts import CountsTable
from .qsim.density import DEFAULT_MAX_DM_QUBITS, DensityMatrix, dm_apply, dm_apply_channel, dm_expect_pauli, dm_init, dm_sample
from .qsim.paulis import PAULI_MATRICES, PauliString
from .qsim.statevector import CapacityError
from .qsim.tableau import NonCliffordError, Tableau, tab_apply_clifford, tab_expect_pauli, tab_init, tab_sample

BACKENDS = ("density", "trajectory", "pauli-exact")


@dataclass(frozen=True)
class NoiseParams:
    """Noise knobs.  Defaults are order-of-magnitude proxies, not calibration data.

    Times are in microseconds; ``math.inf`` switches a decay process off.
    """

    p2q: float = 0.003
    p1q: float = 0.0
    T1: float = 263.0
    T2: float = 149.0
    durations: GateDurations = field(default_factory=GateDurations)
    trajectories: int = 200
    twirl_idle: bool = False  # density backend only; the others always twirl
    jitter: float = 0.0

    def __post_init__(self):
        for name in ("p2q", "p1q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if not self.T1 > 0 or not self.T2 > 0:
            raise ValueError("T1 and T2 must be positive")
        if self.T2 > 2 * self.T1:
            raise ValueError(f"T2={self.T2} exceeds 2*T1={2 * self.T1}")
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")

    @classmethod
    def noiseless(cls) -> "NoiseParams":
        return cls(p2q=0.0, p1q=0.0, T1=math.inf, T2=math.inf)

    @property
    def is_noiseless(self) -> bool:
        return self.p2q == 0 and self.p1q == 0 and math.isinf(self.T1) and math.isinf(self.T2)

    def jittered(self, rng: np.random.Generator) -> "NoiseParams":
        """Copy with p2q, T1, T2 scaled by independent factors 1 + jitter*N(0,1)."""
        if self.jitter == 0:
            return self

        def scale():
            return max(0.05, 1 + self.jitter * rng.standard_normal())

        t1 = self.T1 * scale()
        t2 = min(self.T2 * scale(), 2 * t1)
        return replace(self, p2q=min(1.0, self.p2q * scale()), T1=t1, T2=t2)


# ---------------------------------------------------------------------------
# channels


def _pauli_product_matrices(arity: int):
    for ops in itertools.product("IXYZ", repeat=arity):
        mats = [PAULI_MATRICES[c] for c in reversed(ops)]
        m = mats[0]
        for k in mats[1:]:
            m = np.kron(m, k)
        yield "".join(ops), m


def depolarizing_kraus(p: float, arity: int = 1) -> list[np.ndarray]:
    """rho -> (1-p) rho + p I/d, written as a uniform Pauli mixture."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if arity not in (1, 2):
        raise ValueError("arity must be 1 or 2")
    w = p / 4 ** arity
    out = []
    for label, m in _pauli_product_matrices(arity):
        weight = 1 - p + w if set(label) == {"I"} else w
        if weight > 0:
            out.append(math.sqrt(weight) * m)
    return out


def eta_to_p(eta: float) -> float:
    """Depolarizing probability giving Bloch shrink factor ``eta``."""
    return 1 - eta


def _decay_terms(T1: float, T2: float, t: float) -> tuple[float, float]:
    """(gamma, c): amplitude-damping probability and pure-dephasing coherence factor."""
    if t < 0:
        raise ValueError("idle time must be >= 0")
    if T2 > 2 * T1:
        raise ValueError(f"T2={T2} exceeds 2*T1={2 * T1}")
    gamma = 0.0 if math.isinf(T1) else -math.expm1(-t / T1)
    inv_tphi = (0.0 if math.isinf(T2) else 1 / T2) - (0.0 if math.isinf(T1) else 1 / (2 * T1))
    inv_tphi = max(inv_tphi, 0.0)
    return gamma, math.exp(-t * inv_tphi)


def idle_kraus(T1: float, T2: float, t: float) -> list[np.ndarray]:
    """Amplitude damping followed by pure dephasing over time ``t``."""
    if not T1 > 0:
        raise ValueError("T1 must be positive")
    gamma, c = _decay_terms(T1, T2, t)
    keep = 1.0 if math.isinf(T1) else math.exp(-t / (2 * T1))  # sqrt(1 - gamma) without cancellation
    ad = [np.array([[1, 0], [0, keep]], dtype=complex),
          np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex)]
    pd = [math.sqrt((1 + c) / 2) * np.eye(2, dtype=complex),
          math.sqrt((1 - c) / 2) * PAULI_MATRICES["Z"]]
    return [b @ a for a in ad for b in pd if np.any(b @ a)]


def idle_pauli_rates(T1: float, T2: float, t: float) -> tuple[float, float, float]:
    """Pauli twirl of the idle channel: (px, py, pz)."""
    e1 = 0.0 if math.isinf(T1) else -math.expm1(-t / T1)
    e2 = 0.0 if math.isinf(T2) else -math.expm1(-t / T2)
    px = py = e1 / 4
    return px, py, max(e2 / 2 - px, 0.0)


def pauli_channel_kraus(px: float, py: float, pz: float) -> list[np.ndarray]:
    probs = (1 - px - py - pz, px, py, pz)
    return [math.sqrt(p) * PAULI_MATRICES[s] for p, s in zip(probs, "IXYZ") if p > 0]


# ---------------------------------------------------------------------------
# noise placement


@dataclass(frozen=True)
class NoiseEvent:
    kind: str  # "depolarizing" or "idle"
    qubits: tuple[int, ...]
    p: float = 0.0
    t: float = 0.0


def noisy_stream(c: Circuit, params: NoiseParams) -> list:
    """Ops interleaved with the noise events they trigger, layer by layer."""
    timing = params.durations.table()
    idle_on = not (math.isinf(params.T1) and math.isinf(params.T2))
    started: set[int] = set()
    frozen: set[int] = set()
    out: list = []
    for layer in schedule(c):
        ops = [c.ops[i] for i in layer]
        durs = [op_duration(op, timing) for op in ops]
        span = max(durs)
        busy: dict[int, float] = {}
        for op, d in zip(ops, durs):
            started.update(op.qubits)
            out.append(op)
            k = op.gate.kind
            if op.gate.is_two_qubit and params.p2q > 0:
                out.append(NoiseEvent("depolarizing", op.qubits, p=params.p2q))
            elif not op.gate.is_marker and params.p1q > 0:
                out.append(NoiseEvent("depolarizing", op.qubits, p=params.p1q))
            if k == "MEASURE":
                frozen.update(op.qubits)
            elif k != "IDLE":
                for q in op.qubits:
                    busy[q] = d
        if idle_on:
            for q in sorted(started - frozen):
                t = span - busy.get(q, 0.0)
                if t > 0:
                    out.append(NoiseEvent("idle", (q,), t=t))
    return out


# ---------------------------------------------------------------------------
# execution


@dataclass
class NoisyResult:
    backend: str
    expectations: Optional[np.ndarray] = None
    sigmas: Optional[np.ndarray] = None
    counts: Optional[CountsTable] = None
    state: Optional[DensityMatrix] = None


def _event_kraus(ev: NoiseEvent, params: NoiseParams, twirl: bool):
    if ev.kind == "depolarizing":
        return depolarizing_kraus(ev.p, len(ev.qubits))
    if twirl:
        return pauli_channel_kraus(*idle_pauli_rates(params.T1, params.T2, ev.t))
    return idle_kraus(params.T1, params.T2, ev.t)


def _run_density(c, params, stream, observables, sample_qubits, shots, seed):
    if c.num_qubits > DEFAULT_MAX_DM_QUBITS:
        raise CapacityError(f"{c.num_qubits} qubits exceed the density-matrix limit of {DEFAULT_MAX_DM_QUBITS}")
    dm = dm_init(c.num_qubits)
    for item in stream:
        if isinstance(item, Op):
            dm_apply(dm, item.gate, item.qubits)
        else:
            dm_apply_channel(dm, _event_kraus(item, params, params.twirl_idle), item.qubits)
    res = NoisyResult("density", state=dm)
    if observables:
        res.expectations = np.array([dm_expect_pauli(dm, p) for p in observables])
        res.sigmas = np.zeros(len(observables))
    if sample_qubits is not None:
        res.counts = dm_sample(dm, sample_qubits, shots, seed)
    return res


def _sample_pauli(ev: NoiseEvent, params: NoiseParams, rng: np.random.Generator):
    """Random Pauli error as (x bits, z bits) over ``ev.qubits``, or None."""
    k = len(ev.qubits)
    if ev.kind == "depolarizing":
        if rng.random() >= ev.p:
            return None
        code = int(rng.integers(4 ** k))
        if code == 0:
            return None
        sym = [(code >> (2 * i)) & 3 for i in range(k)]
    else:
        px, py, pz = idle_pauli_rates(params.T1, params.T2, ev.t)
        u = rng.random()
        if u < px:
            sym = [1]
        elif u < px + py:
            sym = [2]
        elif u < px + py + pz:
            sym = [3]
        else:
            return None
    # 0=I 1=X 2=Y 3=Z
    xs = [1 if s in (1, 2) else 0 for s in sym]
    zs = [1 if s in (2, 3) else 0 for s in sym]
    return xs, zs


def _check_clifford(c: Circuit, backend: str) -> None:
    for op in c.ops:
        if not op.gate.is_clifford():
            raise NonCliffordError(f"{backend} backend needs a Clifford circuit; got {op.gate.kind}({op.gate.param})")


def trajectory_tableaus(c: Circuit, params: NoiseParams, seed: int, stream=None):
    """Yield ``(tableau, rng)`` for each trajectory; per-trajectory seeds are spawned from ``seed``."""
    _check_clifford(c, "trajectory")
    stream = noisy_stream(c, params) if stream is None else stream
    n = c.num_qubits
    for child in np.random.SeedSequence(seed).spawn(params.trajectories):
        rng = np.random.default_rng(child)
        tab = tab_init(n)
        for item in stream:
            if isinstance(item, Op):
                tab_apply_clifford(tab, item.gate, item.qubits)
                continue
            err = _sample_pauli(item, params, rng)
            if err is None:
                continue
            xb = np.zeros(n, dtype=np.uint8)
            zb = np.zeros(n, dtype=np.uint8)
            for q, xv, zv in zip(item.qubits, *err):
                xb[q], zb[q] = xv, zv
            tab.apply_pauli(xb, zb)
        yield tab, rng


def _run_trajectory(c, params, stream, observables, sample_qubits, shots, seed):
    ntraj = params.trajectories
    vals = np.zeros((ntraj, len(observables or ())))
    hist: dict[str, int] = {}
    per = [shots // ntraj + (1 if t < shots % ntraj else 0) for t in range(ntraj)] if sample_qubits is not None else []
    for t, (tab, rng) in enumerate(trajectory_tableaus(c, params, seed, stream)):
        for k, p in enumerate(observables or ()):
            vals[t, k] = tab_expect_pauli(tab, p)
        if sample_qubits is not None and per[t] > 0:
            sub = int(rng.integers(2 ** 63))
            ct = tab_sample(tab, sample_qubits, per[t], sub)
            for key, cnt in ct.counts.items():
                hist[key] = hist.get(key, 0) + cnt
    res = NoisyResult("trajectory")
    if observables:
        res.expectations = vals.mean(axis=0)
        res.sigmas = vals.std(axis=0, ddof=1) / math.sqrt(ntraj) if ntraj > 1 else np.zeros(len(observables))
    if sample_qubits is not None:
        res.counts = CountsTable(dict(sorted(hist.items())), shots, seed, tuple(sample_qubits))
    return res


_INVERSE = {"S": "sdg", "SDG": "s", "H": "h", "X": "pauli_x", "Z": "pauli_z"}


def _conjugate_back(rows: Tableau, op: Op) -> None:
    """Replace each row P by G^dagger P G for the gate G of ``op``."""
    k = op.gate.kind
    q = op.qubits
    if op.gate.is_marker:
        return
    if k in _INVERSE:
        getattr(rows, _INVERSE[k])(q[0])
    elif k == "SX":
        # SX^dagger = H S^dagger H
        rows.h(q[0])
        rows.sdg(q[0])
        rows.h(q[0])
    elif k == "RZ":
        from .gates import RZ

        tab_apply_clifford(rows, RZ(-op.gate.param), q)
    elif k == "CNOT":
        rows.cnot(*q)
    elif k == "CZ":
        rows.cz(*q)
    else:  # pragma: no cover
        raise NonCliffordError(k)


def _pauli_factor(x: np.ndarray, z: np.ndarray, ev: NoiseEvent, params: NoiseParams) -> np.ndarray:
    """Shrink factor of each row's Pauli under the event's Pauli channel."""
    qs = list(ev.qubits)
    xs = x[:, qs]
    zs = z[:, qs]
    if ev.kind == "depolarizing":
        nontrivial = (xs | zs).any(axis=1)
        return np.where(nontrivial, 1 - ev.p, 1.0)
    px, py, pz = idle_pauli_rates(params.T1, params.T2, ev.t)
    xq, zq = xs[:, 0], zs[:, 0]
    fx = 1 - 2 * (py + pz)
    fy = 1 - 2 * (px + pz)
    fz = 1 - 2 * (px + py)
    return np.select([(xq == 1) & (zq == 0), (xq == 1) & (zq == 1), (xq == 0) & (zq == 1)], [fx, fy, fz], 1.0)


def pauli_exact_batch(c: Circuit, params: NoiseParams, x: np.ndarray, z: np.ndarray, stream=None) -> np.ndarray:
    """Exact noisy expectations of the Paulis sigma(x[k], z[k]) for a Clifford circuit.

    Each observable is pulled back through the circuit (Heisenberg picture);
    a Pauli channel only rescales the current Pauli, so the result is the
    ideal expectation times the product of the factors met along the way.
    Idle decay enters through its Pauli twirl.
    """
    _check_clifford(c, "pauli-exact")
    stream = noisy_stream(c, params) if stream is None else stream
    x = np.array(x, dtype=np.uint8, ndmin=2)
    z = np.array(z, dtype=np.uint8, ndmin=2)
    if x.shape[1] != c.num_qubits or x.shape != z.shape:
        raise ValueError("observable length does not match register")
    m = x.shape[0]
    rows = Tableau(c.num_qubits, x, z, np.zeros(m, dtype=np.uint8))
    factor = np.ones(m)
    for item in reversed(stream):
        if isinstance(item, Op):
            _conjugate_back(rows, item)
        else:
            factor *= _pauli_factor(rows.x, rows.z, item, params)
    ideal = np.where(rows.x.any(axis=1), 0.0, np.where(rows.r == 0, 1.0, -1.0))
    return factor * ideal


def pauli_exact_expectations(c: Circuit, params: NoiseParams, observables: Sequence[PauliString], stream=None) -> np.ndarray:
    n = c.num_qubits
    if not observables:
        return np.zeros(0)
    coef = []
    for p in observables:
        if p.num_qubits != n:
            raise ValueError("observable length does not match register")
        if abs(np.imag(p.coefficient)) > 0:
            raise ValueError("observables must have real coefficients")
        coef.append(float(np.real(p.coefficient)))
    bits = [p.bits() for p in observables]
    x = np.stack([b[0] for b in bits])
    z = np.stack([b[1] for b in bits])
    return np.array(coef) * pauli_exact_batch(c, params, x, z, stream)


def execute_noisy(
    c: Circuit,
    params: NoiseParams,
    backend: str = "density",
    seed: int = 0,
    observables: Optional[Sequence[PauliString]] = None,
    sample_qubits: Optional[Sequence[int]] = None,
    shots: int = 0,
) -> NoisyResult:
    """Run ``c`` under ``params``.

    ``density`` returns the final state (<= 13 qubits) and exact expectations;
    ``trajectory`` averages stochastic Pauli insertions on the tableau and
    reports trajectory standard errors; ``pauli-exact`` gives the infinite-
    trajectory limit of ``trajectory`` deterministically.  Counts are drawn
    when ``sample_qubits`` is given.
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    if sample_qubits is not None and shots < 1:
        raise ValueError("shots must be >= 1 when sampling")
    stream = noisy_stream(c, params)
    if backend == "density":
        return _run_density(c, params, stream, observables, sample_qubits, shots, seed)
    if backend == "trajectory":
        return _run_trajectory(c, params, stream, observables, sample_qubits, shots, seed)
    if sample_qubits is not None:
        raise ValueError("pauli-exact backend returns expectations only")
    vals = pauli_exact_expectations(c, params, observables or [], stream)
    return NoisyResult("pauli-exact", vals, np.zeros(len(vals)))
