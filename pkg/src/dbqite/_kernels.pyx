# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Pauli-string kernels on complex128 statevectors.

Masks follow the convention P|b> = phase * (-1)**popcount(b & zmask) |b ^ xmask>.
"""
import numpy as np

from libc.math cimport cos, sin


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline double _sign(unsigned long long b, unsigned long long z) noexcept nogil:
    return -1.0 if (__builtin_popcountll(b & z) & 1) else 1.0


def apply_pauli_sum(const double complex[::1] psi,
                    const long long[::1] xmasks,
                    const long long[::1] zmasks,
                    const double complex[::1] coeffs):
    """Return sum_j coeffs[j] * P_j psi."""
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t nt = xmasks.shape[0]
    cdef Py_ssize_t t, b
    cdef unsigned long long x, z
    cdef double complex c
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for t in range(nt):
            x = <unsigned long long>xmasks[t]
            z = <unsigned long long>zmasks[t]
            c = coeffs[t]
            for b in range(n):
                o[b ^ x] += c * _sign(b, z) * psi[b]
    return out


def apply_rotations_inplace(double complex[::1] psi,
                            const long long[::1] xmasks,
                            const long long[::1] zmasks,
                            const double complex[::1] phases,
                            const double[::1] thetas):
    """Apply exp(i thetas[j] P_j) for j = 0, 1, ... in order, overwriting psi."""
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t nt = xmasks.shape[0]
    cdef Py_ssize_t t, b, bx
    cdef unsigned long long x, z
    cdef double c, s
    cdef double complex ip, a0, a1
    with nogil:
        for t in range(nt):
            x = <unsigned long long>xmasks[t]
            z = <unsigned long long>zmasks[t]
            c = cos(thetas[t])
            s = sin(thetas[t])
            ip = 1j * s * phases[t]
            if x == 0:
                for b in range(n):
                    psi[b] = (c + ip * _sign(b, z)) * psi[b]
            else:
                for b in range(n):
                    bx = b ^ x
                    if bx > b:
                        a0 = psi[b]
                        a1 = psi[bx]
                        psi[b] = c * a0 + ip * _sign(bx, z) * a1
                        psi[bx] = c * a1 + ip * _sign(b, z) * a0
