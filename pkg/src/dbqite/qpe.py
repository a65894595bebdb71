"""Phase-estimation baseline: post-selecting the all-zeros readout on a rescaled Hamiltonian.

With the spectrum of H' mapped into [0, 1), the all-zeros amplitude for
eigenphase theta is K(theta) = 2**-k sum_m exp(2 pi i m theta), so the ground
branch (theta = 0) passes with amplitude exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dbqite.hamiltonian import PauliSum, eigensystem, real_matvec
from dbqite.statevector import StateVector, as_array

MAX_QPE_QUBITS = 18


@dataclass(frozen=True)
class QpeResult:
    precision_qubits: int
    success_prob: float
    post_fidelity: float
    rescale_factor: float = 1.0
    post_state: StateVector | None = None

    def as_dict(self) -> dict:
        return {
            "precision_qubits": self.precision_qubits,
            "success_prob": self.success_prob,
            "post_fidelity": self.post_fidelity,
            "rescale_factor": self.rescale_factor,
        }


def rescale_hamiltonian(H: PauliSum, lambda0_est: float, norm_est: float) -> PauliSum:
    """(H - lambda0_est) / (norm_est - lambda0_est).

    ``norm_est`` is an estimate of the top of the spectrum. With exact
    extremal eigenvalues the spectrum becomes [0, 1]; multiplying the width
    norm_est - lambda0_est by kappa compresses it to [0, 1/kappa].
    """
    if not norm_est > lambda0_est:
        raise ValueError("norm_est must exceed lambda0_est")
    return H.shifted(-lambda0_est).scaled(1.0 / (norm_est - lambda0_est))


def exact_rescale(H: PauliSum, kappa: float = 1.0) -> PauliSum:
    """Rescale with the exact lowest and highest eigenvalues, widening the window by ``kappa``."""
    w, _ = eigensystem(H)
    return rescale_hamiltonian(H, w[0], w[0] + kappa * (w[-1] - w[0]))


def phase_kernel(theta, k: int) -> np.ndarray:
    """All-zeros amplitude 2**-k sum_{m < 2**k} exp(2 pi i m theta)."""
    theta = np.asarray(theta, dtype=float)
    m = np.arange(2**k)
    return np.exp(2j * np.pi * np.multiply.outer(theta, m)).mean(axis=-1)


def _result(k, amps_eig, V, kappa, keep_state):
    p = float(np.vdot(amps_eig, amps_eig).real)
    if p == 0.0:
        return QpeResult(k, 0.0, 0.0, kappa)
    fid = float(abs(amps_eig[0]) ** 2 / p)
    state = StateVector(real_matvec(V, amps_eig) / np.sqrt(p)) if keep_state else None
    return QpeResult(k, min(p, 1.0), min(fid, 1.0), kappa, state)


def qpe_spectral(Hp: PauliSum, psi0, k: int, rescale_factor: float = 1.0,
                 keep_state: bool = False) -> QpeResult:
    """Success probability and post-selected ground-state fidelity from the eigenbasis.

    Fidelity is measured against the lowest eigenvector of ``Hp``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    w, V = eigensystem(Hp)
    c = real_matvec(V.conj().T, as_array(psi0))
    return _result(k, c * phase_kernel(w, k), V, rescale_factor, keep_state)


def _hadamard(state, q, idx):
    hi = (idx >> q) & 1
    partner = state[idx ^ (1 << q)]
    return np.where(hi == 0, state + partner, partner - state) / np.sqrt(2.0)


def _controlled_phase(state, a, b, phi, idx):
    both = ((idx >> a) & 1) & ((idx >> b) & 1)
    return np.where(both == 1, state * np.exp(1j * phi), state)


def _swap(state, a, b, idx):
    ba, bb = (idx >> a) & 1, (idx >> b) & 1
    src = idx ^ ((ba ^ bb) * ((1 << a) | (1 << b)))
    return state[src]


def inverse_qft_gates(k: int) -> list[tuple]:
    """Gate list of the inverse QFT on qubits 0..k-1 (qubit k-1 most significant)."""
    fwd = []
    for a in reversed(range(k)):
        fwd.append(("h", a))
        for b in reversed(range(a)):
            fwd.append(("cp", b, a, 2 * np.pi / 2 ** (a - b + 1)))
    for a in range(k // 2):
        fwd.append(("swap", a, k - 1 - a))
    inv = []
    for g in reversed(fwd):
        inv.append(("cp", g[1], g[2], -g[3]) if g[0] == "cp" else g)
    return inv


def apply_register_gates(state: np.ndarray, gates, offset: int) -> np.ndarray:
    """Apply a gate list to qubits shifted by ``offset`` in a full statevector."""
    idx = np.arange(state.size, dtype=np.int64)
    for g in gates:
        if g[0] == "h":
            state = _hadamard(state, g[1] + offset, idx)
        elif g[0] == "cp":
            state = _controlled_phase(state, g[1] + offset, g[2] + offset, g[3], idx)
        else:
            state = _swap(state, g[1] + offset, g[2] + offset, idx)
    return state


def qpe_statevector(Hp: PauliSum, psi0, k: int, rescale_factor: float = 1.0,
                    max_qubits: int = MAX_QPE_QUBITS, keep_state: bool = False) -> QpeResult:
    """Explicit (L + k)-qubit simulation: Hadamards, controlled exp(2 pi i 2^j H'), inverse QFT.

    System qubits occupy the low bits; precision qubit j controls the
    2**j-th power and sits at bit L + j.
    """
    L = Hp.num_qubits
    if k < 1:
        raise ValueError("k must be >= 1")
    if L + k > max_qubits:
        raise MemoryError(f"{L + k} qubits exceed the cap of {max_qubits}")
    w, V = eigensystem(Hp)
    dim = 2**L
    state = np.zeros(2**k * dim, dtype=np.complex128)
    state[:dim] = as_array(psi0)
    state = apply_register_gates(state, [("h", j) for j in range(k)], L)
    rows = state.reshape(2**k, dim)
    pattern = np.arange(2**k)
    for j in range(k):
        sel = (pattern >> j) & 1 == 1
        phase = np.exp(2j * np.pi * 2**j * w)
        rows[sel] = ((V * phase) @ (V.conj().T @ rows[sel].T)).T
    state = rows.reshape(-1)
    state = apply_register_gates(state, inverse_qft_gates(k), L)
    branch = state[:dim]
    return _result(k, real_matvec(V.conj().T, branch), V, rescale_factor, keep_state)
