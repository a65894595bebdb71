"""Double-bracket quantum imaginary-time evolution on a statevector simulator."""

from dbqite.costing import GateCounts, ReflectionModel, dbqite_cost, hamsim_cost, qpe_cost, reflection_cost
from dbqite.flows import (
    DegenerateGroundStateError,
    FlowTrace,
    Schedule,
    StepRecord,
    dbi_step,
    dbqite_step,
    gci_operator_error,
    grid_search_step,
    hva_state,
    run_flow,
    verify_dbi_theorems,
    verify_theorem1,
    verify_theorem2,
)
from dbqite.hamiltonian import (
    ConvergenceError,
    DenseThresholdError,
    Evolution,
    PauliSum,
    SpectralSummary,
    apply_hamiltonian,
    energy_and_variance,
    evolve,
    heisenberg_chain,
    shift,
    spectral_summary,
)
from dbqite.ite import hastings_analysis, ite_curve, ite_dbf_residual, ite_frr_residual, ite_state
from dbqite.kernels import BACKEND
from dbqite.qpe import QpeResult, qpe_spectral, qpe_statevector, rescale_hamiltonian
from dbqite.statevector import (
    PauliString,
    StateVector,
    apply_pauli,
    apply_pauli_exponential,
    fidelity,
    inner_product,
    singlet_state,
)

__all__ = [
    "BACKEND", "ConvergenceError", "DegenerateGroundStateError", "DenseThresholdError", "Evolution",
    "FlowTrace", "GateCounts", "PauliString", "PauliSum", "QpeResult", "ReflectionModel", "Schedule",
    "SpectralSummary", "StateVector", "StepRecord", "apply_hamiltonian", "apply_pauli",
    "apply_pauli_exponential", "dbi_step", "dbqite_cost", "dbqite_step", "energy_and_variance",
    "evolve", "fidelity", "gci_operator_error", "grid_search_step", "hamsim_cost", "hastings_analysis",
    "heisenberg_chain", "hva_state", "inner_product", "ite_curve", "ite_dbf_residual",
    "ite_frr_residual", "ite_state", "qpe_cost", "qpe_spectral", "qpe_statevector",
    "reflection_cost", "rescale_hamiltonian", "run_flow", "shift", "singlet_state",
    "spectral_summary", "verify_dbi_theorems", "verify_theorem1", "verify_theorem2",
]
