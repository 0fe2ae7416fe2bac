"""In-place gate kernels over flat amplitude arrays.

Bit ``q`` of the flat index belongs to qubit ``q``.  The 1- and 2-qubit paths
work on strided views so a 25-qubit register never needs a full temporary.
"""

from __future__ import annotations

import numpy as np


def _is_diag(m: np.ndarray) -> bool:
    return not np.any(m - np.diag(np.diag(m)))


def apply_1q(psi: np.ndarray, nbits: int, q: int, u: np.ndarray) -> None:
    v = psi.reshape(1 << (nbits - 1 - q), 2, 1 << q)
    a = v[:, 0, :]
    b = v[:, 1, :]
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    if u01 == 0 and u10 == 0:
        if u00 != 1:
            a *= u00
        if u11 != 1:
            b *= u11
        return
    if u00 == 0 and u11 == 0:
        tmp = a.copy()
        np.multiply(b, u01, out=a)
        np.multiply(tmp, u10, out=b)
        return
    if u00 == u01 == u10 == -u11:
        # Hadamard-like: a, b <- s(a + b), s(a - b)
        tmp = a - b
        a += b
        a *= u00
        np.multiply(tmp, u00, out=b)
        return
    tmp = a.copy()
    a *= u00
    a += u01 * b
    b *= u11
    b += u10 * tmp


def _blocks(psi: np.ndarray, nbits: int, q0: int, q1: int):
    """Return views ``blk[b0][b1]`` selecting bit values of qubits q0, q1."""
    hi, lo = max(q0, q1), min(q0, q1)
    v = psi.reshape(1 << (nbits - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    if q0 == lo:
        return [[v[:, b1, :, b0, :] for b1 in (0, 1)] for b0 in (0, 1)]
    return [[v[:, b0, :, b1, :] for b1 in (0, 1)] for b0 in (0, 1)]


def apply_2q(psi: np.ndarray, nbits: int, q0: int, q1: int, u: np.ndarray) -> None:
    """Apply a 4x4 matrix with local index ``b0 + 2*b1`` (b0 from ``q0``)."""
    if q0 == q1:
        raise ValueError("two-qubit gate needs distinct targets")
    blk = _blocks(psi, nbits, q0, q1)
    idx = [(0, 0), (1, 0), (0, 1), (1, 1)]  # local index -> (b0, b1)
    if _is_diag(u):
        for k, (b0, b1) in enumerate(idx):
            if u[k, k] != 1:
                blk[b0][b1] *= u[k, k]
        return
    if np.count_nonzero(u) == 4 and np.all(np.count_nonzero(u, axis=0) == 1):
        # permutation times phases; only moved blocks are copied
        perm = [int(np.flatnonzero(u[r])[0]) for r in range(4)]
        moved = [c for r, c in enumerate(perm) if r != c]
        src = {c: blk[idx[c][0]][idx[c][1]].copy() for c in moved}
        for r, (b0, b1) in enumerate(idx):
            c = perm[r]
            if r != c:
                np.multiply(src[c], u[r, c], out=blk[b0][b1])
            elif u[r, r] != 1:
                blk[b0][b1] *= u[r, r]
        return
    src = [blk[b0][b1].copy() for (b0, b1) in idx]
    for r, (b0, b1) in enumerate(idx):
        out = blk[b0][b1]
        out[...] = 0
        for c in range(4):
            if u[r, c] != 0:
                out += u[r, c] * src[c]


def apply_kq(psi: np.ndarray, nbits: int, qubits, m: np.ndarray) -> np.ndarray:
    """Apply a ``2^k x 2^k`` matrix (local bit i <- ``qubits[i]``); returns a new array."""
    k = len(qubits)
    t = psi.reshape((2,) * nbits)
    axes = [nbits - 1 - q for q in reversed(qubits)]  # most significant local bit first
    mr = m.reshape((2,) * (2 * k))
    out = np.tensordot(mr, t, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return np.ascontiguousarray(out).reshape(-1)


def apply_matrix(psi: np.ndarray, nbits: int, qubits, m: np.ndarray) -> np.ndarray:
    """Dispatch to the in-place kernels when possible; returns the (possibly new) array."""
    if len(qubits) == 1:
        apply_1q(psi, nbits, qubits[0], m)
        return psi
    if len(qubits) == 2:
        apply_2q(psi, nbits, qubits[0], qubits[1], m)
        return psi
    return apply_kq(psi, nbits, list(qubits), m)
