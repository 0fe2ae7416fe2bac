"""Stabilizer tableau (CHP-style) with GF(2) sampling and batched expectations.

Rows ``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers.  Row ``i``
represents ``(-1)**r[i] * prod_q sigma(x[i, q], z[i, q])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gates import Gate, rz_quarter_turns
from .counts import CountsTable
from .paulis import PauliString, anticommutes, multiply

MAX_TABLEAU_QUBITS = 1024


class NonCliffordError(ValueError):
    pass


@dataclass
class Tableau:
    num_qubits: int
    x: np.ndarray  # (2n, n) uint8
    z: np.ndarray  # (2n, n) uint8
    r: np.ndarray  # (2n,) uint8

    def copy(self) -> "Tableau":
        return Tableau(self.num_qubits, self.x.copy(), self.z.copy(), self.r.copy())

    @property
    def stabilizers(self):
        n = self.num_qubits
        return self.x[n:], self.z[n:], self.r[n:]

    def check(self) -> None:
        """Verify the symplectic commutation structure."""
        n = self.num_qubits
        xf = self.x.astype(np.int64)
        zf = self.z.astype(np.int64)
        sym = (xf @ zf.T + zf @ xf.T) % 2
        want = np.zeros((2 * n, 2 * n), dtype=np.int64)
        want[np.arange(n), np.arange(n) + n] = 1
        want[np.arange(n) + n, np.arange(n)] = 1
        if not np.array_equal(sym, want):
            raise ValueError("tableau rows do not form a symplectic basis")

    # gates ---------------------------------------------------------------
    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def sdg(self, q: int) -> None:
        self.r ^= self.x[:, q] & (self.z[:, q] ^ 1)
        self.z[:, q] ^= self.x[:, q]

    def pauli_x(self, q: int) -> None:
        self.r ^= self.z[:, q]

    def pauli_z(self, q: int) -> None:
        self.r ^= self.x[:, q]

    def pauli_y(self, q: int) -> None:
        self.r ^= self.x[:, q] ^ self.z[:, q]

    def sx(self, q: int) -> None:
        # SX = H S H up to global phase
        self.h(q)
        self.s(q)
        self.h(q)

    def cnot(self, a: int, b: int) -> None:
        xa, za, xb, zb = self.x[:, a], self.z[:, a], self.x[:, b], self.z[:, b]
        self.r ^= xa & zb & (xb ^ za ^ 1)
        self.x[:, b] ^= xa
        self.z[:, a] ^= zb

    def cz(self, a: int, b: int) -> None:
        self.h(b)
        self.cnot(a, b)
        self.h(b)

    def apply_pauli(self, xbits: np.ndarray, zbits: np.ndarray) -> None:
        """Conjugate by a Pauli operator given as bit vectors (sign flips only)."""
        flip = (self.x.astype(np.int64) @ zbits.astype(np.int64) + self.z.astype(np.int64) @ xbits.astype(np.int64)) % 2
        self.r ^= flip.astype(np.uint8)


def tab_init(num_qubits: int) -> Tableau:
    if not 1 <= num_qubits <= MAX_TABLEAU_QUBITS:
        raise ValueError(f"tableau supports 1..{MAX_TABLEAU_QUBITS} qubits")
    n = num_qubits
    x = np.zeros((2 * n, n), dtype=np.uint8)
    z = np.zeros((2 * n, n), dtype=np.uint8)
    x[np.arange(n), np.arange(n)] = 1
    z[np.arange(n) + n, np.arange(n)] = 1
    return Tableau(n, x, z, np.zeros(2 * n, dtype=np.uint8))


_RZ_TURNS = {0: (), 1: ("s",), 2: ("pauli_z",), 3: ("sdg",)}
_ONE_Q = {"H": "h", "S": "s", "SDG": "sdg", "X": "pauli_x", "Z": "pauli_z", "SX": "sx"}


def tab_apply_clifford(tab: Tableau, gate: Gate, targets) -> Tableau:
    targets = tuple(int(t) for t in targets)
    for t in targets:
        if not 0 <= t < tab.num_qubits:
            raise IndexError(f"qubit {t} out of range")
    if gate.is_marker:
        return tab
    if gate.arity != len(targets) or len(set(targets)) != len(targets):
        raise ValueError(f"bad targets {targets} for {gate.kind}")
    k = gate.kind
    if k in _ONE_Q:
        getattr(tab, _ONE_Q[k])(targets[0])
    elif k == "RZ":
        turns = rz_quarter_turns(gate.param)
        if turns is None:
            raise NonCliffordError(f"non-Clifford gate RZ({gate.param!r}) cannot run on the tableau backend")
        for name in _RZ_TURNS[turns]:
            getattr(tab, name)(targets[0])
    elif k == "CNOT":
        tab.cnot(*targets)
    elif k == "CZ":
        tab.cz(*targets)
    else:  # pragma: no cover - every kind is handled above
        raise NonCliffordError(f"gate {k} not supported by the tableau backend")
    return tab


def tab_run(circuit, tab: Tableau | None = None) -> Tableau:
    if tab is None:
        tab = tab_init(circuit.num_qubits)
    for op in circuit.ops:
        tab_apply_clifford(tab, op.gate, op.qubits)
    return tab


def _product_phase(tab: Tableau, rows: np.ndarray):
    """Multiply selected stabilizer rows; returns (x, z, exponent of i)."""
    n = tab.num_qubits
    xs, zs, rs = tab.stabilizers
    acc_x = np.zeros(n, dtype=np.uint8)
    acc_z = np.zeros(n, dtype=np.uint8)
    e = 0
    for i in np.flatnonzero(rows):
        acc_x, acc_z, e = multiply(acc_x, acc_z, e, xs[i], zs[i], 2 * int(rs[i]))
    return acc_x, acc_z, int(e)


def tab_expect_pauli(tab: Tableau, p: PauliString) -> float:
    """Exact expectation: coefficient times -1, 0 or +1."""
    if p.num_qubits != tab.num_qubits:
        raise ValueError("Pauli string length does not match register")
    n = tab.num_qubits
    px, pz = p.bits()
    xs, zs, _ = tab.stabilizers
    if anticommutes(xs, zs, px[None, :], pz[None, :]).any():
        return 0.0
    sel = anticommutes(tab.x[:n], tab.z[:n], px[None, :], pz[None, :]).astype(bool)
    ax, az, e = _product_phase(tab, sel)
    if not (np.array_equal(ax, px) and np.array_equal(az, pz)):  # pragma: no cover
        raise RuntimeError("stabilizer decomposition failed")
    # product of stabilizers = i^e sigma(px, pz) has expectation +1
    val = {0: 1.0, 2: -1.0}[e % 4]
    return float((p.coefficient * val).real)


# ---------------------------------------------------------------------------
# subgroup restriction and GF(2) sampling


@dataclass
class StabilizerGroup:
    """Generators ``i**e[k] sigma(x[k], z[k])`` of an abelian group on ``num_qubits``.

    The stabilized (possibly mixed) state is ``prod_k (I + g_k)/2`` normalised.
    Generators are kept in reduced row-echelon form with pivot columns
    ``pivots`` (indices into the concatenated ``[x | z]`` bit row).
    """

    num_qubits: int
    x: np.ndarray
    z: np.ndarray
    e: np.ndarray
    pivots: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.e)

    def expect_batch(self, bx: np.ndarray, bz: np.ndarray, be: np.ndarray | None = None) -> np.ndarray:
        """Exact expectations of many Paulis ``i**be sigma(bx, bz)`` (rows of the batch)."""
        bx = np.atleast_2d(np.asarray(bx, dtype=np.uint8))
        bz = np.atleast_2d(np.asarray(bz, dtype=np.uint8))
        m = bx.shape[0]
        be = np.zeros(m, dtype=np.int64) if be is None else np.asarray(be, dtype=np.int64)
        n = self.num_qubits
        if self.rank == 0:
            out = np.zeros(m)
            ident = ~(bx.any(axis=1) | bz.any(axis=1))
            out[ident] = np.real(1j ** be[ident])
            return out
        full = np.concatenate([bx, bz], axis=1)
        coeff = full[:, self.pivots]  # (m, k)
        acc_x = np.zeros((m, n), dtype=np.uint8)
        acc_z = np.zeros((m, n), dtype=np.uint8)
        acc_e = np.zeros(m, dtype=np.int64)
        for k in range(self.rank):
            sel = coeff[:, k].astype(bool)
            if not sel.any():
                continue
            nx, nz, ne = multiply(acc_x[sel], acc_z[sel], acc_e[sel], self.x[k][None, :], self.z[k][None, :], self.e[k])
            acc_x[sel], acc_z[sel], acc_e[sel] = nx, nz, ne
        member = np.all(acc_x == bx, axis=1) & np.all(acc_z == bz, axis=1)
        out = np.zeros(m)
        diff = (be - acc_e) % 4
        out[member] = np.where(diff[member] == 0, 1.0, np.where(diff[member] == 2, -1.0, np.nan))
        if np.isnan(out).any():  # pragma: no cover
            raise RuntimeError("non-Hermitian phase in stabilizer expectation")
        return out

    def expect(self, p: PauliString) -> float:
        x, z = p.bits()
        return float((p.coefficient * self.expect_batch(x, z)[0]).real)

    def to_density(self) -> np.ndarray:
        """Dense density matrix (small groups only)."""
        from .paulis import pauli_from_bits

        d = 1 << self.num_qubits
        rho = np.eye(d, dtype=complex)
        for k in range(self.rank):
            g = (1j ** int(self.e[k])) * pauli_from_bits(self.x[k], self.z[k]).matrix()
            rho = rho @ (np.eye(d) + g) / 2
        return rho / np.trace(rho)


def _eliminate(x, z, e, cols_order):
    """Gaussian elimination with phase tracking over the given bit columns.

    ``cols_order`` indexes the concatenated ``[x | z]`` row.  Returns the
    transformed arrays, the number of pivot rows and the list of pivot columns.
    Pivot rows are moved to the top in order.
    """
    x, z, e = x.copy(), z.copy(), e.copy()
    n = x.shape[1]
    rows = x.shape[0]
    piv_row = 0
    pivots = []
    for col in cols_order:
        if piv_row >= rows:
            break
        colbits = x[:, col] if col < n else z[:, col - n]
        cand = np.flatnonzero(colbits[piv_row:]) + piv_row
        if len(cand) == 0:
            continue
        p = cand[0]
        if p != piv_row:
            x[[p, piv_row]] = x[[piv_row, p]]
            z[[p, piv_row]] = z[[piv_row, p]]
            e[[p, piv_row]] = e[[piv_row, p]]
        colbits = x[:, col] if col < n else z[:, col - n]
        others = np.flatnonzero(colbits)
        others = others[others != piv_row]
        if len(others):
            # row_o <- row_pivot * row_o keeps the group; order matters only for phase
            nx, nz, ne = multiply(x[piv_row][None, :], z[piv_row][None, :], e[piv_row], x[others], z[others], e[others])
            x[others], z[others], e[others] = nx, nz, ne
        pivots.append(col)
        piv_row += 1
    return x, z, e, piv_row, pivots


def restrict_group(x, z, e, keep) -> StabilizerGroup:
    """Subgroup of the group generated by rows (x, z, e) supported on ``keep``.

    The result is expressed on the local register ``keep`` (keep[0] -> qubit 0).
    """
    n = x.shape[1]
    keep = list(keep)
    rest = [q for q in range(n) if q not in set(keep)]
    cols = rest + [n + q for q in rest]
    x2, z2, e2, npiv, _ = _eliminate(x, z, e, cols)
    gx = x2[npiv:][:, keep]
    gz = z2[npiv:][:, keep]
    ge = e2[npiv:]
    k = len(keep)
    # drop identity rows (dependent generators) and canonicalise
    allcols = list(range(2 * k))
    gx, gz, ge, npiv2, pivots = _eliminate(gx, gz, ge, allcols)
    return StabilizerGroup(k, gx[:npiv2], gz[:npiv2], ge[:npiv2] % 4, np.array(pivots, dtype=np.int64))


def tab_reduced(tab: Tableau, keep) -> StabilizerGroup:
    """Stabilizer description of the reduced state on ``keep``."""
    xs, zs, rs = tab.stabilizers
    return restrict_group(xs, zs, 2 * rs.astype(np.int64), keep)


def z_outcome_structure(group: StabilizerGroup):
    """Affine description of Z-basis outcomes: ``A b = s (mod 2)`` for the generator rows."""
    k = group.num_qubits
    # eliminate X columns: remaining rows are +-Z strings
    x2, z2, e2, npiv, _ = _eliminate(group.x, group.z, group.e, list(range(k)))
    zx = x2[npiv:]
    zz = z2[npiv:]
    ze = e2[npiv:] % 4
    assert not zx.any()
    return zz, (ze // 2).astype(np.uint8)


def _solve_affine(a: np.ndarray, s: np.ndarray, k: int):
    """Particular solution and nullspace basis of ``a b = s`` over GF(2)."""
    a = a.copy().astype(np.uint8)
    s = s.copy().astype(np.uint8)
    rows = a.shape[0]
    piv_cols = []
    r = 0
    for c in range(k):
        if r >= rows:
            break
        cand = np.flatnonzero(a[r:, c]) + r
        if len(cand) == 0:
            continue
        p = cand[0]
        a[[p, r]] = a[[r, p]]
        s[[p, r]] = s[[r, p]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        a[others] ^= a[r]
        s[others] ^= s[r]
        piv_cols.append(c)
        r += 1
    if np.any(s[r:]):  # pragma: no cover - stabilizer groups are consistent
        raise RuntimeError("inconsistent outcome constraints")
    part = np.zeros(k, dtype=np.uint8)
    for i, c in enumerate(piv_cols):
        part[c] = s[i]
    free = [c for c in range(k) if c not in piv_cols]
    basis = []
    for f in free:
        v = np.zeros(k, dtype=np.uint8)
        v[f] = 1
        for i, c in enumerate(piv_cols):
            v[c] = a[i, f]
        basis.append(v)
    return part, np.array(basis, dtype=np.uint8).reshape(len(basis), k)


def tab_sample(tab: Tableau, qubits, shots: int, seed: int) -> CountsTable:
    """Exact Born-rule samples of Z outcomes on ``qubits``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    qubits = list(qubits)
    group = tab_reduced(tab, qubits)
    a, s = z_outcome_structure(group)
    k = len(qubits)
    part, basis = _solve_affine(a, s, k)
    rng = np.random.default_rng(seed)
    coeffs = rng.integers(0, 2, size=(shots, len(basis)), dtype=np.uint8)
    outs = (coeffs.astype(np.int64) @ basis.astype(np.int64)) % 2 if len(basis) else np.zeros((shots, k), dtype=np.int64)
    outs = outs ^ part.astype(np.int64)
    weights = 1 << np.arange(k, dtype=np.int64)
    return CountsTable.from_indices(outs @ weights, k, seed, tuple(qubits))


def tab_probabilities(tab: Tableau, qubits) -> np.ndarray:
    """Exact Born distribution (uniform on an affine subspace); small subsets only."""
    qubits = list(qubits)
    k = len(qubits)
    group = tab_reduced(tab, qubits)
    a, s = z_outcome_structure(group)
    idx = np.arange(1 << k, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(k)) & 1).astype(np.int64)
    ok = np.all((bits @ a.T.astype(np.int64)) % 2 == s.astype(np.int64), axis=1)
    p = ok.astype(float)
    return p / p.sum()
