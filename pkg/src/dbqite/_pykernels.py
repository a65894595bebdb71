"""Numpy reference implementation of the Pauli-string kernels."""

import numpy as np

_ARANGE_CACHE: dict[int, np.ndarray] = {}


def _indices(n):
    idx = _ARANGE_CACHE.get(n)
    if idx is None:
        idx = np.arange(n, dtype=np.int64)
        _ARANGE_CACHE[n] = idx
    return idx


def _signs(v):
    return 1.0 - 2.0 * (np.bitwise_count(v) & 1)


def apply_pauli_sum(psi, xmasks, zmasks, coeffs):
    """Return sum_j coeffs[j] * P_j psi."""
    psi = np.asarray(psi, dtype=np.complex128)
    idx = _indices(psi.size)
    out = np.zeros(psi.size, dtype=np.complex128)
    for x, z, c in zip(xmasks, zmasks, coeffs):
        src = idx ^ x
        out += c * _signs(src & z) * psi[src]
    return out


def apply_rotations_inplace(psi, xmasks, zmasks, phases, thetas):
    """Apply exp(i thetas[j] P_j) for j = 0, 1, ... in order, overwriting psi."""
    idx = _indices(psi.size)
    for x, z, ph, th in zip(xmasks, zmasks, phases, thetas):
        src = idx ^ x
        p_psi = ph * _signs(src & z) * psi[src]
        psi *= np.cos(th)
        psi += 1j * np.sin(th) * p_psi
