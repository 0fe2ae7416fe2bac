"""Simulation engines: dense statevector, density matrix and stabilizer tableau."""

from .counts import CountsTable
from .density import (
    DensityMatrix,
    dm_apply,
    dm_apply_channel,
    dm_expect_pauli,
    dm_init,
    dm_probabilities,
    dm_reduced,
    dm_run,
    dm_sample,
    fidelity_with_pure,
)
from .paulis import PauliString
from .statevector import (
    CapacityError,
    StateVector,
    sv_apply,
    sv_expect_pauli,
    sv_init,
    sv_probabilities,
    sv_reduced,
    sv_run,
    sv_sample,
)
from .tableau import (
    NonCliffordError,
    StabilizerGroup,
    Tableau,
    tab_apply_clifford,
    tab_expect_pauli,
    tab_init,
    tab_probabilities,
    tab_reduced,
    tab_run,
    tab_sample,
)
