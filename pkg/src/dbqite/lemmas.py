"""Dense checks of the bracket identities and energy-variance inequalities (small L only).

Each function returns ``(lhs, rhs)`` for an inequality ``lhs <= rhs`` or an
identity ``lhs == rhs``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from dbqite.hamiltonian import PauliSum, eigensystem, energy_and_variance
from dbqite.statevector import as_array

MAX_DENSE_LEMMA_QUBITS = 6


def _dense(H: PauliSum) -> np.ndarray:
    if H.num_qubits > MAX_DENSE_LEMMA_QUBITS:
        raise ValueError(f"dense lemma checks are limited to L <= {MAX_DENSE_LEMMA_QUBITS}")
    return H.to_dense().astype(np.complex128)


def _bracket(H: PauliSum, psi) -> np.ndarray:
    """[H, |psi><psi|] as a dense matrix."""
    Hd = _dense(H)
    v = as_array(psi)
    P = np.outer(v, v.conj())
    return Hd @ P - P @ Hd


def bracket_variance(H: PauliSum, psi) -> tuple[float, float]:
    """Squared Hilbert-Schmidt norm of [H, psi psi^dag] against twice the variance."""
    B = _bracket(H, psi)
    _, v = energy_and_variance(H, psi)
    return float(np.linalg.norm(B, "fro") ** 2), 2.0 * v


def bracket_perturbation(H: PauliSum, psi) -> tuple[float, float]:
    """||I - exp([H, psi psi^dag])|| (operator norm) against 2 sqrt(V)."""
    B = _bracket(H, psi)
    _, v = energy_and_variance(H, psi)
    lhs = np.linalg.norm(np.eye(B.shape[0]) - sla.expm(B), 2)
    return float(lhs), 2.0 * np.sqrt(v)


def dbi_remainder(H: PauliSum, psi, r: float) -> tuple[float, float]:
    """||exp(-r[H,psi psi^dag]) - I + r[H,psi psi^dag]||_HS against r**2 V."""
    B = _bracket(H, psi)
    _, v = energy_and_variance(H, psi)
    R = sla.expm(-r * B) - np.eye(B.shape[0]) + r * B
    return float(np.linalg.norm(R, "fro")), r * r * v


def ground_fidelity_bounds(H: PauliSum, psi) -> dict[str, tuple[float, float]]:
    """Energy and variance against the infidelity after shifting lambda0 to zero.

    Returns pairs for E >= lambda1 eps (as ``(lambda1 eps, E)``),
    V <= W**2 eps and V / W <= E (as ``(V / W, E)``), all in lhs <= rhs form.
    """
    w, vecs = eigensystem(H)
    shifted = H.shifted(-w[0])
    width = w[-1] - w[0]
    e, v = energy_and_variance(shifted, psi)
    eps = 1.0 - abs(np.vdot(vecs[:, 0], as_array(psi))) ** 2
    return {
        "energy_lower": ((w[1] - w[0]) * eps, e),
        "variance_upper": (v, width**2 * eps),
        "energy_over_variance": (v / width if width > 0 else 0.0, e),
    }
