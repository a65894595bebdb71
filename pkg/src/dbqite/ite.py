"""Exact imaginary-time evolution and its diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dbqite.hamiltonian import PauliSum, apply_hamiltonian, eigensystem, energy_and_variance, real_matvec
from dbqite.statevector import StateVector, as_array

_LOG_TINY = math.log(1e-300)


class StateAnnihilatedError(ArithmeticError):
    pass


def _ite_array(H: PauliSum, psi0, tau: float) -> np.ndarray:
    """Normalized exp(-tau H) psi0 for any real tau (negative values are used by finite differences)."""
    arr = as_array(psi0)
    if arr.size != H.dim:
        raise ValueError("incompatible qubit counts")
    w, V = eigensystem(H)
    c = real_matvec(V.conj().T, arr)
    support = np.abs(c) > 0
    if not support.any():
        raise StateAnnihilatedError("state annihilated")
    expo = -float(tau) * w
    top = expo[support].max()
    amp = np.where(support, c * np.exp(expo - top), 0.0)
    nrm = np.linalg.norm(amp)
    if nrm == 0.0 or top + math.log(nrm) < _LOG_TINY:
        raise StateAnnihilatedError("state annihilated")
    return real_matvec(V, amp / nrm)


def ite_state(H: PauliSum, psi0, tau: float) -> StateVector:
    """Normalized exp(-tau H) psi0, evaluated in the eigenbasis with the dominant factor removed."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return StateVector(_ite_array(H, psi0, tau), copy=False)


@dataclass(frozen=True)
class IteCurve:
    taus: np.ndarray
    energies: np.ndarray
    variances: np.ndarray
    fidelities: np.ndarray


def ite_curve(H: PauliSum, psi0, taus, ground_state=None) -> IteCurve:
    """Energy, variance and ground-state fidelity along a list of durations."""
    taus = np.asarray(taus, dtype=float)
    if ground_state is None:
        ground_state = eigensystem(H)[1][:, 0]
    gs = as_array(ground_state)
    E, V, F = [], [], []
    for tau in taus:
        psi = _ite_array(H, psi0, tau)
        e, v = energy_and_variance(H, psi)
        E.append(e)
        V.append(v)
        F.append(abs(np.vdot(gs, psi)) ** 2)
    return IteCurve(taus, np.array(E), np.array(V), np.array(F))


def ite_frr_residual(H: PauliSum, psi0, tau: float, dtau: float = 1e-5) -> tuple[float, float]:
    """Central difference of E(tau) against -2 V(tau).

    Returns ``(lhs, rhs)``; the two agree to O(dtau**2).
    """
    e_plus, _ = energy_and_variance(H, _ite_array(H, psi0, tau + dtau))
    e_minus, _ = energy_and_variance(H, _ite_array(H, psi0, tau - dtau))
    _, v = energy_and_variance(H, _ite_array(H, psi0, tau))
    return (e_plus - e_minus) / (2 * dtau), -2.0 * v


def ite_dbf_residual(H: PauliSum, psi0, tau: float, dtau: float = 1e-5) -> float:
    """Norm of d/dtau psi(tau) minus [psi psi^dag, H] psi, with a central difference."""
    psi = _ite_array(H, psi0, tau)
    deriv = (_ite_array(H, psi0, tau + dtau) - _ite_array(H, psi0, tau - dtau)) / (2 * dtau)
    h = apply_hamiltonian(H, psi)
    e = np.vdot(psi, h).real
    return float(np.linalg.norm(deriv - (e * psi - h)))


@dataclass(frozen=True)
class DensityOfStates:
    """Level counts in windows of width gap above the ground energy.

    ``counts[m]`` is the number of eigenvalues in [m*gap, (m+1)*gap) after
    shifting the ground energy to zero. ``c_h`` is the smallest constant with
    ``counts[m] <= (c_h L)**m / m!`` for every m >= 1.
    """

    gap: float
    counts: np.ndarray
    c_h: float
    num_qubits: int

    def satisfies(self, c_h: float | None = None) -> bool:
        c = self.c_h if c_h is None else c_h
        L = self.num_qubits
        for m in range(1, len(self.counts)):
            if self.counts[m] > (c * L) ** m / math.factorial(m) * (1 + 1e-12):
                return False
        return True


def density_of_states(eigenvalues, num_qubits: int) -> DensityOfStates:
    w = np.sort(np.asarray(eigenvalues, dtype=float))
    gap = w[1] - w[0]
    if gap <= 0:
        raise ValueError("degenerate ground level: the window width would be zero")
    m = np.floor((w - w[0]) / gap + 1e-9).astype(np.int64)
    counts = np.bincount(m)
    c = 0.0
    for k in range(1, counts.size):
        if counts[k] > 0:
            c = max(c, math.exp((math.log(counts[k]) + math.lgamma(k + 1)) / k))
    return DensityOfStates(float(gap), counts, c / num_qubits, num_qubits)


def hastings_duration(dos: DensityOfStates, f0: float, delta: float) -> float:
    """ITE duration sufficient for fidelity 1 - delta; negative when no evolution is needed."""
    L = dos.num_qubits
    return math.log(dos.c_h * L / math.log1p(delta * f0)) / (2 * dos.gap)


def hastings_analysis(H: PauliSum, psi0, delta: float) -> tuple[DensityOfStates, float, bool]:
    """Fit the density of states, compute the sufficient duration and check it.

    A negative duration means the bound is already met at tau = 0; it is
    clamped to zero before the fidelity check.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    w, V = eigensystem(H)
    dos = density_of_states(w, H.num_qubits)
    f0 = abs(np.vdot(V[:, 0], as_array(psi0))) ** 2
    if f0 < 1e-14:
        raise ValueError("initial state has zero ground-state overlap")
    tau_h = hastings_duration(dos, f0, delta)
    psi = _ite_array(H, psi0, max(tau_h, 0.0))
    fid = abs(np.vdot(V[:, 0], psi)) ** 2
    return dos, tau_h, bool(fid >= 1 - delta - 1e-12)
