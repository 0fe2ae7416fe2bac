"""Self-checks run by ``encclone verify``.

Each check returns ``(name, ok, detail)``.  They cover oracle equivalence of
the circuit decompositions and a handful of invariants cheap enough to run on
every invocation.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .circuit import circuit_unitary, equal_up_to_phase, lower_to_native
from .estimators import bell_fidelity
from .oracles import dense_u_dec, dense_u_enc, uqcm_reference
from .protocol import ANCILLA, build_pipeline, decryption_circuit, encryption_circuit, plan_iterated
from .qsim.paulis import PauliString
from .qsim.statevector import sv_expect_pauli, sv_run
from .qsim.tableau import tab_expect_pauli, tab_run

TOL = 1e-9


def check_encryption_oracle(n_max: int = 4):
    worst = max(
        equal_up_to_phase(circuit_unitary(encryption_circuit(0, list(range(1, n + 1)), n + 1)), dense_u_enc(n))
        for n in range(1, n_max + 1)
    )
    return "encryption matches dense oracle", worst < TOL, f"max deviation {worst:.2e}"


def check_decryption_oracle(n_values=(2, 3)):
    worst = 0.0
    for n in n_values:
        for j in range(1, n + 1):
            u = circuit_unitary(decryption_circuit(0, list(range(1, n + 1)), j, n + 1))
            worst = max(worst, equal_up_to_phase(u, dense_u_dec(n, j)))
    return "decryption matches dense oracle", worst < TOL, f"max deviation {worst:.2e}"


def check_lowering(n_max: int = 3):
    worst = 0.0
    for n in range(1, n_max + 1):
        c = encryption_circuit(0, list(range(1, n + 1)), n + 1)
        worst = max(worst, equal_up_to_phase(circuit_unitary(lower_to_native(c)), circuit_unitary(c)))
    return "native lowering preserves the unitary", worst < TOL, f"max deviation {worst:.2e}"


def _pipeline_fidelity(n: int, j: int) -> float:
    c, layout = build_pipeline(n, j)
    tab = tab_run(c)
    a, s = layout[ANCILLA], layout[f"S{j}"]
    vals = [tab_expect_pauli(tab, PauliString.from_sparse(c.num_qubits, {a: p, s: p})) for p in "XYZ"]
    return bell_fidelity(*vals)


def check_recovery(n_max: int = 8):
    worst = max(abs(1 - _pipeline_fidelity(n, j)) for n in range(1, n_max + 1) for j in range(1, n + 1))
    return "every clone recovers the input", worst < TOL, f"max |1-F| {worst:.2e}"


def check_backend_agreement(n: int = 3):
    c, layout = build_pipeline(n)
    sv, tab = sv_run(c), tab_run(c)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(50):
        p = PauliString("".join(rng.choice(list("IXYZ"), c.num_qubits)))
        worst = max(worst, abs(sv_expect_pauli(sv, p) - tab_expect_pauli(tab, p)))
    return "tableau agrees with statevector", worst < TOL, f"max deviation {worst:.2e}"


def check_counting():
    got = [plan_iterated(2, l).total_qubits for l in (0, 1, 2)]
    clones = [plan_iterated(2, l).clone_count for l in (0, 1, 2)]
    sb = plan_iterated(2, 5, strategy="single-branch")
    ok = got == [6, 18, 54] and clones == [3, 9, 27] and (sb.total_qubits, sb.virtual_clone_count) == (26, 729)
    return "iteration counting laws", ok, f"qubits {got}, clones {clones}, l=5 {sb.total_qubits}/{sb.virtual_clone_count}"


def check_uqcm():
    ok = True
    for M, fe in ((3, 2 / 3), (5, 0.6), (7, 4 / 7)):
        ref = uqcm_reference(M)
        ok &= abs(ref.fidelity - fe) < 5e-4 and ref.chsh < 2
    return "UQCM reference values", bool(ok), "M = 3, 5, 7; S below the classical bound 2"


CHECKS: tuple[Callable, ...] = (
    check_encryption_oracle,
    check_decryption_oracle,
    check_lowering,
    check_recovery,
    check_backend_agreement,
    check_counting,
    check_uqcm,
)


def run_all(echo=print) -> bool:
    ok_all = True
    for check in CHECKS:
        try:
            name, ok, detail = check()
        except Exception as exc:  # report and keep going
            name, ok, detail = check.__name__, False, f"{type(exc).__name__}: {exc}"
        ok_all &= bool(ok)
        echo(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    return ok_all


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(0 if run_all() else 1)
