import numpy as np
import pytest
import scipy.linalg as sla

from dbqite.hamiltonian import PauliSum

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_pauli(label: str) -> np.ndarray:
    """Dense matrix of a label whose character q acts on qubit q (qubit 0 least significant)."""
    out = np.eye(1, dtype=complex)
    for c in label:
        # higher qubits are more significant, so they go to the left
        out = np.kron(PAULI[c], out)
    return out


def dense_from_labels(H: PauliSum) -> np.ndarray:
    """Independent dense construction through Kronecker products."""
    L = H.num_qubits
    M = H.offset * np.eye(2**L, dtype=complex)
    for c, P in H.terms:
        M = M + c * kron_pauli(P.label(L))
    return M


def dense_exp(M, t):
    return sla.expm(1j * t * M)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
