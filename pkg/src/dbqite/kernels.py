"""Backend selection for the Pauli-string kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation is loaded. Set ``DBQITE_KERNELS=python`` to force numpy.
"""

import os

import numpy as np

if os.environ.get("DBQITE_KERNELS", "").lower() == "python":
    from dbqite import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from dbqite import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        from dbqite import _pykernels as _impl

        BACKEND = "python"


def apply_pauli_sum(psi, xmasks, zmasks, coeffs):
    return _impl.apply_pauli_sum(
        np.ascontiguousarray(psi, dtype=np.complex128),
        np.ascontiguousarray(xmasks, dtype=np.int64),
        np.ascontiguousarray(zmasks, dtype=np.int64),
        np.ascontiguousarray(coeffs, dtype=np.complex128),
    )


def apply_rotations(psi, xmasks, zmasks, phases, thetas):
    """Return a new array with the rotation sequence applied to ``psi``."""
    out = np.array(psi, dtype=np.complex128, copy=True)
    _impl.apply_rotations_inplace(
        out,
        np.ascontiguousarray(xmasks, dtype=np.int64),
        np.ascontiguousarray(zmasks, dtype=np.int64),
        np.ascontiguousarray(phases, dtype=np.complex128),
        np.ascontiguousarray(thetas, dtype=np.float64),
    )
    return out
