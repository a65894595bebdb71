import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbqite import _pykernels, kernels
from dbqite.hamiltonian import heisenberg_chain, random_pauli_sum
from dbqite.statevector import random_state

compiled = pytest.importorskip("dbqite._kernels")


@settings(max_examples=40)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_backends_agree_on_pauli_sum(L, seed):
    rng = np.random.default_rng(seed)
    H = random_pauli_sum(L, rng)
    xm, zm, ph, co = H._masks
    psi = random_state(L, rng).amplitudes.copy()
    a = compiled.apply_pauli_sum(psi, xm, zm, ph * co)
    b = _pykernels.apply_pauli_sum(psi, xm, zm, ph * co)
    assert np.allclose(a, b, atol=1e-13)


@settings(max_examples=40)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_backends_agree_on_rotations(L, seed):
    rng = np.random.default_rng(seed)
    H = random_pauli_sum(L, rng)
    xm, zm, ph, _ = H._masks
    thetas = rng.uniform(-1, 1, size=xm.size)
    psi = random_state(L, rng).amplitudes
    a, b = psi.copy(), psi.copy()
    compiled.apply_rotations_inplace(a, xm, zm, ph, thetas)
    _pykernels.apply_rotations_inplace(b, xm, zm, ph, thetas)
    assert np.allclose(a, b, atol=1e-13)


def test_selected_backend_is_compiled():
    if os.environ.get("DBQITE_KERNELS", "").lower() == "python":
        pytest.skip("fallback forced")
    assert kernels.BACKEND == "cython"


def test_env_forces_fallback():
    code = "from dbqite import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, DBQITE_KERNELS="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"


def test_apply_rotations_does_not_mutate_input():
    H = heisenberg_chain(4)
    xm, zm, ph, co = H._masks
    psi = random_state(4, np.random.default_rng(1)).amplitudes.copy()
    before = psi.copy()
    kernels.apply_rotations(psi, xm, zm, ph, co)
    assert np.array_equal(psi, before)


def test_reload_is_idempotent():
    importlib.reload(kernels)
    assert kernels.BACKEND in ("cython", "python")
