"""Circuit builders for encrypted cloning: preparation, encryption, decryption, iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import gates as g
from .circuit import Circuit, CircuitBuilder, Op, dumps, loads
from .qsim.statevector import DEFAULT_MAX_QUBITS

ANCILLA = "A~"


@dataclass(frozen=True)
class QubitLayout:
    """Role name of every physical qubit (``roles[q]`` names qubit ``q``)."""

    roles: tuple[str, ...]
    n: int
    l: int = 0
    j: int = 1

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(self.roles))
        if len(set(self.roles)) != len(self.roles):
            raise ValueError("duplicate role names in layout")

    @property
    def num_qubits(self) -> int:
        return len(self.roles)

    def index(self, role: str) -> int:
        try:
            return self.roles.index(role)
        except ValueError:
            raise KeyError(f"layout has no role {role!r}") from None

    def __getitem__(self, role: str) -> int:
        return self.index(role)

    def signals(self, suffix: str = "") -> list[int]:
        return [self.index(f"S{i}{suffix}") for i in range(1, self.n + 1)]

    def noises(self, suffix: str = "") -> list[int]:
        return [self.index(f"N{i}{suffix}") for i in range(1, self.n + 1)]

    @classmethod
    def standard(cls, n: int, j: int = 1) -> "QubitLayout":
        """A~, A, S_1..S_n, N_1..N_n on qubits 0..2n+1."""
        if n < 1:
            raise ValueError("n must be >= 1")
        roles = [ANCILLA, "A"] + [f"S{i}" for i in range(1, n + 1)] + [f"N{i}" for i in range(1, n + 1)]
        return cls(tuple(roles), n, 0, j)

    def header(self) -> list[str]:
        lines = [f"layout n={self.n} l={self.l} j={self.j}"]
        lines += [f"role {q} {r}" for q, r in enumerate(self.roles)]
        return lines

    @classmethod
    def from_header(cls, header: Sequence[str]) -> "QubitLayout":
        params = {}
        roles: dict[int, str] = {}
        for line in header:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "layout":
                params = {k: int(v) for k, v in (p.split("=") for p in parts[1:])}
            elif parts[0] == "role":
                roles[int(parts[1])] = parts[2]
        if not params or sorted(roles) != list(range(len(roles))):
            raise ValueError("header does not describe a complete layout")
        return cls(tuple(roles[q] for q in range(len(roles))), params["n"], params.get("l", 0), params.get("j", 1))


# ---------------------------------------------------------------------------
# elementary preparations


def _width(qubits, num_qubits):
    return num_qubits if num_qubits is not None else max(qubits) + 1


def bell_prep(a: int, b: int, num_qubits: Optional[int] = None) -> Circuit:
    if a == b:
        raise ValueError("Bell preparation needs two distinct qubits")
    return CircuitBuilder(_width((a, b), num_qubits)).h(a).cnot(a, b).build()


def ghz_prep(qubits: Sequence[int], num_qubits: Optional[int] = None) -> Circuit:
    qubits = list(qubits)
    if not qubits:
        raise ValueError("GHZ preparation needs at least one qubit")
    b = CircuitBuilder(_width(qubits, num_qubits)).h(qubits[0])
    # fan out in a binary tree to keep the entangling depth logarithmic
    have = [qubits[0]]
    todo = qubits[1:]
    while todo:
        new = []
        for src in have:
            if not todo:
                break
            dst = todo.pop(0)
            b.cnot(src, dst)
            new.append(dst)
        have += new
    return b.build()


# ---------------------------------------------------------------------------
# encryption


def _zparity_ladder(qs: Sequence[int]) -> tuple[list[tuple[int, int]], int]:
    """CNOT list that gathers the Z parity of ``qs`` onto a centre qubit.

    Two chains meet in the middle; odd register sizes with an extra pair get a
    leading CNOT folding the last qubit into its neighbour.
    """
    qs = list(qs)
    pre: list[tuple[int, int]] = []
    if len(qs) % 2 == 0:
        pre.append((qs[-1], qs[-2]))
        qs = qs[:-1]
    m = (len(qs) - 1) // 2
    if m == 0:
        return pre, qs[0]
    top = [(qs[i], qs[i + 1]) for i in range(m)]
    bottom = [(qs[i], qs[i - 1]) for i in range(2 * m, m + 1, -1)]
    # interleave so the two chains share layers
    ladder = []
    for k in range(max(len(top), len(bottom))):
        if k < len(top):
            ladder.append(top[k])
        if k < len(bottom):
            ladder.append(bottom[k])
    return pre + ladder + [(qs[m], qs[m + 1])], qs[m + 1]


def _zz_exponential(b: CircuitBuilder, qs: Sequence[int]) -> None:
    """exp(-i pi/4 Z..Z) on ``qs``."""
    ladder, centre = _zparity_ladder(qs)
    for c, t in ladder:
        b.cnot(c, t)
    b.rz(math.pi / 2, centre)
    for c, t in reversed(ladder):
        b.cnot(c, t)


def encryption_circuit(carrier: int, signals: Sequence[int], num_qubits: int) -> Circuit:
    """U_enc on (carrier, signals): the Z..Z exponential first, then X..X."""
    qs = [carrier] + list(signals)
    if len(signals) < 1:
        raise ValueError("need at least one signal qubit")
    b = CircuitBuilder(num_qubits)
    _zz_exponential(b, qs)
    for q in qs:
        b.h(q)
    _zz_exponential(b, qs)
    for q in qs:
        b.h(q)
    return b.build()


def build_encryption(n: int, layout: QubitLayout) -> Circuit:
    if n < 1:
        raise ValueError("n must be >= 1")
    signals = [layout[f"S{i}"] for i in range(1, n + 1)]
    return encryption_circuit(layout["A"], signals, layout.num_qubits).with_layout(layout)


# ---------------------------------------------------------------------------
# decryption


def _v(b: CircuitBuilder, s: int, nj: int) -> None:
    b.h(nj).cz(s, nj).h(s).h(nj)


def _v_dagger(b: CircuitBuilder, s: int, nj: int) -> None:
    b.h(s).h(nj).cz(s, nj).h(nj)


def decryption_circuit(clone: int, noises: Sequence[int], j: int, num_qubits: int) -> Circuit:
    """U_dec for clone ``j`` acting on the clone qubit and all noise qubits.

    V-conjugated form: in the V frame the clone and N_j are classical controls
    selecting which transposed Pauli to apply on the remaining noise qubits.
    """
    noises = list(noises)
    n = len(noises)
    if not 1 <= j <= n:
        raise ValueError(f"clone index j={j} outside 1..{n}")
    nj = noises[j - 1]
    others = [q for i, q in enumerate(noises) if i != j - 1]
    b = CircuitBuilder(num_qubits)
    _v(b, clone, nj)
    for k, ni in enumerate(others):
        if k == 0:
            b.cnot(nj, ni).cz(clone, ni)
        else:
            b.cz(clone, ni).cnot(nj, ni)
    b.s(clone).s(nj)
    if n == 1:
        b.cz(clone, nj)
    _v_dagger(b, clone, nj)
    return b.build()


def build_decryption(n: int, layout: QubitLayout, j: Optional[int] = None) -> Circuit:
    j = layout.j if j is None else j
    if not 1 <= j <= n:
        raise ValueError(f"clone index j={j} outside 1..{n}")
    noises = [layout[f"N{i}"] for i in range(1, n + 1)]
    return decryption_circuit(layout[f"S{j}"], noises, j, layout.num_qubits).with_layout(layout)


def prepare_register(layout: QubitLayout) -> Circuit:
    """Bell pairs (A~, A) and (S_i, N_i)."""
    b = CircuitBuilder(layout.num_qubits, layout)
    b.extend(bell_prep(layout[ANCILLA], layout["A"], layout.num_qubits))
    for s, nq in zip(layout.signals(), layout.noises()):
        b.extend(bell_prep(s, nq, layout.num_qubits))
    return b.build()


def build_pipeline(n: int, j: int = 1) -> tuple[Circuit, QubitLayout]:
    """Preparation, encryption and decryption of clone ``j`` (no readout)."""
    layout = QubitLayout.standard(n, j)
    c = prepare_register(layout) + build_encryption(n, layout) + build_decryption(n, layout, j)
    return c.with_layout(layout), layout


# ---------------------------------------------------------------------------
# iteration


@dataclass(frozen=True)
class EncryptionGroup:
    """One application of U_enc.

    ``path`` lists clone choices from the root (0 = the carrier itself,
    i >= 1 = signal i); the root group has path ().
    """

    path: tuple[int, ...]
    carrier: int
    signals: tuple[int, ...]
    noises: tuple[int, ...]

    @property
    def level(self) -> int:
        return len(self.path)

    def clone_qubit(self, choice: int) -> int:
        return self.carrier if choice == 0 else self.signals[choice - 1]


def _suffix(path: tuple[int, ...]) -> str:
    return "@" + ".".join(map(str, path)) if path else ""


@dataclass
class IterationPlan:
    n: int
    l: int
    strategy: str
    groups: list[EncryptionGroup]
    layout: QubitLayout
    circuit: Circuit  # preparation + all encryptions
    target: tuple[int, ...]
    decryption: Circuit
    virtual_clone_count: int
    extra: tuple[tuple[int, ...], ...] = ()
    capacity: int = DEFAULT_MAX_QUBITS
    notes: list[str] = field(default_factory=list)

    @property
    def total_qubits(self) -> int:
        return self.layout.num_qubits

    @property
    def clone_count(self) -> int:
        """Physical clone qubits: the original carrier plus every signal qubit."""
        return 1 + sum(len(gr.signals) for gr in self.groups)

    @property
    def key_size(self) -> int:
        return self.n * len(self.target)

    @property
    def exceeds_capacity(self) -> bool:
        return self.total_qubits > self.capacity

    @property
    def target_qubit(self) -> int:
        return _resolve_target(self.groups, self.target, self.layout["A"])[0]

    @property
    def full_circuit(self) -> Circuit:
        return (self.circuit + self.decryption).with_layout(self.layout)

    def to_text(self) -> str:
        header = self.layout.header() + [
            f"plan strategy={self.strategy} clones={self.clone_count} "
            f"virtual={self.virtual_clone_count} key={self.key_size} "
            f"target={'.'.join(map(str, self.target))}"
        ]
        return dumps(self.full_circuit, header)


def clone_paths(n: int, depth: int) -> list[tuple[int, ...]]:
    """All clone paths of the given length in lexicographic order."""
    paths: list[tuple[int, ...]] = [()]
    for _ in range(depth):
        paths = [p + (c,) for p in paths for c in range(n + 1)]
    return paths


def _group_paths(n: int, l: int, strategy: str, branch: int) -> list[tuple[int, ...]]:
    if strategy == "full":
        return [p for d in range(l + 1) for p in clone_paths(n, d)]
    if strategy == "single-branch":
        return [(branch,) * d for d in range(l + 1)]
    raise ValueError(f"unknown strategy {strategy!r}")


def _resolve_target(groups, target, root_qubit):
    by_path = {gr.path: gr for gr in groups}
    q = root_qubit
    used = []
    for d, choice in enumerate(target):
        gr = by_path.get(tuple(target[:d]))
        if gr is None:
            raise ValueError(f"no encryption group along target path at depth {d}")
        if not 0 <= choice <= len(gr.signals):
            raise ValueError(f"clone choice {choice} out of range")
        used.append(gr)
        q = gr.clone_qubit(choice)
    return q, used


def plan_iterated(
    n: int,
    l: int,
    strategy: str = "full",
    extra=0,
    target: Optional[Sequence[int]] = None,
    capacity: int = DEFAULT_MAX_QUBITS,
) -> IterationPlan:
    """Plan ``l`` iterations of n-clone encryption.

    ``extra`` adds one more generation for a subset of the last-level clones:
    either a count (first k clones in lexicographic path order) or explicit
    clone paths of length l+1.  ``target`` is the clone path to decrypt; the
    default follows signal 1 at every level, through the first extra group if
    any.
    """
    if n < 2 or n % 2:
        raise ValueError("iteration needs an even n >= 2 so the carrier itself is a clone")
    if l < 0:
        raise ValueError("l must be >= 0")
    branch = 1
    paths = _group_paths(n, l, strategy, branch)
    if isinstance(extra, int):
        if extra < 0:
            raise ValueError("extra must be >= 0")
        if strategy == "full":
            leaves = clone_paths(n, l + 1)
        else:
            leaves = [(branch,) * l + (c,) for c in range(n + 1)]
        if extra > len(leaves):
            raise ValueError(f"only {len(leaves)} clones available for re-cloning")
        extra_paths = tuple(leaves[:extra])
    else:
        extra_paths = tuple(tuple(p) for p in extra)
        for p in extra_paths:
            if len(p) != l + 1:
                raise ValueError("extra clone paths must have length l+1")
    paths = paths + list(extra_paths)

    roles = [ANCILLA, "A"]
    groups: list[EncryptionGroup] = []
    by_path: dict[tuple[int, ...], EncryptionGroup] = {}
    for p in paths:
        if p:
            parent = by_path.get(p[:-1])
            if parent is None:
                raise ValueError(f"clone path {p} has no parent encryption")
            carrier = parent.clone_qubit(p[-1])
        else:
            carrier = 1
        sfx = _suffix(p)
        base = len(roles)
        roles += [f"S{i}{sfx}" for i in range(1, n + 1)]
        roles += [f"N{i}{sfx}" for i in range(1, n + 1)]
        gr = EncryptionGroup(p, carrier, tuple(range(base, base + n)), tuple(range(base + n, base + 2 * n)))
        groups.append(gr)
        by_path[p] = gr

    if target is None:
        target = (branch,) * (l + 1)
        if extra_paths:
            target = extra_paths[0] + (branch,)
    target = tuple(target)
    virtual = (n + 1) ** (l + 1)
    if strategy == "single-branch" or extra_paths:
        virtual = (n + 1) ** (len(target))
    layout = QubitLayout(tuple(roles), n, l, target[-1] if target else 1)
    num = layout.num_qubits

    b = CircuitBuilder(num, layout)
    b.extend(bell_prep(0, 1, num))
    for gr in groups:
        for s, nq in zip(gr.signals, gr.noises):
            b.extend(bell_prep(s, nq, num))
    for gr in groups:
        b.extend(encryption_circuit(gr.carrier, gr.signals, num))
    prep = b.build()

    q, used = _resolve_target(groups, target, 1)
    dec = CircuitBuilder(num, layout)
    for gr, choice in reversed(list(zip(used, target))):
        if choice == 0:
            dec.extend(encryption_circuit(q, gr.noises, num).inverse())
        else:
            dec.extend(decryption_circuit(q, gr.noises, choice, num))
    plan = IterationPlan(n, l, strategy, groups, layout, prep, target, dec.build(), virtual, extra_paths, capacity)
    if plan.exceeds_capacity:
        plan.notes.append(
            f"{plan.total_qubits} qubits exceed the statevector capacity {capacity}; use the tableau backend"
        )
    return plan


def plan_from_text(text: str) -> tuple[Circuit, QubitLayout]:
    c, header = loads(text)
    layout = QubitLayout.from_header(header)
    return c.with_layout(layout), layout


# ---------------------------------------------------------------------------
# parallel cloning of GHZ states


def build_experiment4(r: int, n: int = 2) -> tuple[Circuit, QubitLayout, list[int]]:
    """GHZ_r over r inputs, each cloned by its own n-clone group; S_1 of each decrypted.

    Returns the circuit, the layout and the r recovered qubits.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    roles = []
    for k in range(1, r + 1):
        sfx = f"/{k}"
        roles += [f"A{sfx}"] + [f"S{i}{sfx}" for i in range(1, n + 1)] + [f"N{i}{sfx}" for i in range(1, n + 1)]
    layout = QubitLayout(tuple(roles), n, 0, 1)
    num = layout.num_qubits
    inputs = [layout[f"A/{k}"] for k in range(1, r + 1)]
    b = CircuitBuilder(num, layout)
    b.extend(ghz_prep(inputs, num))
    for k in range(1, r + 1):
        for i in range(1, n + 1):
            b.extend(bell_prep(layout[f"S{i}/{k}"], layout[f"N{i}/{k}"], num))
    for k in range(1, r + 1):
        b.extend(encryption_circuit(layout[f"A/{k}"], layout.signals(f"/{k}"), num))
    for k in range(1, r + 1):
        b.extend(decryption_circuit(layout[f"S1/{k}"], layout.noises(f"/{k}"), 1, num))
    return b.build(), layout, [layout[f"S1/{k}"] for k in range(1, r + 1)]


def without_qubit(c: Circuit, q: int) -> Circuit:
    """Drop every op touching ``q`` (used to show an incomplete key fails)."""
    return Circuit(c.num_qubits, [op for op in c.ops if q not in op.qubits], c.layout)
