#!/usr/bin/env python3
"""Noiseless stabilizer runs of the largest iterated plans (54 and 154 qubits)."""

import time

from encclone.estimators import bell_fidelity
from encclone.protocol import ANCILLA, plan_iterated
from encclone.qsim.paulis import PauliString
from encclone.qsim.tableau import tab_expect_pauli, tab_run

if __name__ == "__main__":
    for kw in ({"l": 2}, {"l": 5, "strategy": "single-branch"}, {"l": 2, "extra": 25}):
        plan = plan_iterated(2, **kw)
        t0 = time.perf_counter()
        c = plan.full_circuit
        tab = tab_run(c)
        a, s = plan.layout[ANCILLA], plan.target_qubit
        vals = [tab_expect_pauli(tab, PauliString.from_sparse(c.num_qubits, {a: p, s: p})) for p in "XYZ"]
        print(f"{kw}: {plan.total_qubits} qubits, {plan.clone_count} clones, "
              f"{plan.virtual_clone_count} virtual, F_e = {bell_fidelity(*vals)!r} "
              f"({time.perf_counter() - t0:.2f} s)")
