import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_from_labels
from dbqite.hamiltonian import PauliSum, energy_and_variance, heisenberg_chain, random_pauli_sum, spectral_summary
from dbqite.ite import (
    StateAnnihilatedError,
    density_of_states,
    hastings_analysis,
    hastings_duration,
    ite_curve,
    ite_dbf_residual,
    ite_frr_residual,
    ite_state,
)
from dbqite.statevector import PauliString, basis_state, fidelity, random_state, singlet_state

seeds = st.integers(0, 2**32 - 1)


def test_tau_zero_is_identity(rng):
    psi = random_state(3, rng)
    H = random_pauli_sum(3, rng)
    assert np.allclose(ite_state(H, psi, 0.0).amplitudes, psi.amplitudes, atol=1e-12)


def test_eigenstate_unchanged():
    H = heisenberg_chain(4)
    gs = spectral_summary(H).ground_state
    assert fidelity(ite_state(H, gs, 3.0), gs) == pytest.approx(1.0, abs=1e-12)


def test_matches_dense_expm(rng):
    import scipy.linalg as sla

    H = random_pauli_sum(3, rng)
    psi = random_state(3, rng)
    v = sla.expm(-0.7 * dense_from_labels(H)) @ psi.amplitudes
    v /= np.linalg.norm(v)
    assert np.linalg.norm(ite_state(H, psi, 0.7).amplitudes - v) <= 1e-10


def test_singlet_converges():
    H = heisenberg_chain(4)
    gs = spectral_summary(H).ground_state
    assert fidelity(ite_state(H, singlet_state(4), 10.0), gs) >= 1 - 1e-6


def test_large_tau_does_not_overflow():
    H = heisenberg_chain(4).scaled(1e3)
    psi = singlet_state(4)
    out = ite_state(H, psi, 50.0)
    assert abs(out.norm() - 1) <= 1e-12


def test_annihilated_state():
    H = PauliSum(1, ((1.0, PauliString.from_label("Z")),))
    with pytest.raises(StateAnnihilatedError, match="state annihilated"):
        ite_state(H, np.zeros(2), 1.0)


def test_negative_tau_rejected():
    with pytest.raises(ValueError):
        ite_state(heisenberg_chain(2), singlet_state(2), -0.1)


@settings(max_examples=20)
@given(seeds, st.floats(0, 2), st.floats(0, 2))
def test_semigroup(seed, t1, t2):
    rng = np.random.default_rng(seed)
    H = random_pauli_sum(3, rng)
    psi = random_state(3, rng)
    a = ite_state(H, ite_state(H, psi, t1), t2).amplitudes
    b = ite_state(H, psi, t1 + t2).amplitudes
    assert np.linalg.norm(a - b) <= 1e-10


@settings(max_examples=20)
@given(seeds)
def test_curve_monotone(seed):
    rng = np.random.default_rng(seed)
    H = random_pauli_sum(3, rng)
    curve = ite_curve(H, random_state(3, rng), np.linspace(0, 3, 13))
    assert np.all(np.diff(curve.energies) <= 1e-9)
    assert np.all(np.diff(curve.fidelities) >= -1e-9)


def test_frr_eigenstate_zero():
    H = heisenberg_chain(2)
    lhs, rhs = ite_frr_residual(H, singlet_state(2), 0.3)
    assert abs(lhs) <= 1e-8 and rhs == 0.0


def test_frr_random_l3(rng):
    H = random_pauli_sum(3, rng)
    lhs, rhs = ite_frr_residual(H, random_state(3, rng), 0.3)
    assert abs(lhs - rhs) <= 1e-3 * abs(rhs)


def test_frr_rhs_matches_variance():
    H = heisenberg_chain(4)
    _, rhs = ite_frr_residual(H, singlet_state(4), 0.0)
    assert rhs == pytest.approx(-2 * energy_and_variance(H, singlet_state(4))[1], abs=1e-12)


def test_dbf_residual_eigenstate():
    H = heisenberg_chain(4)
    gs = spectral_summary(H).ground_state
    assert ite_dbf_residual(H, gs, 0.5) <= 1e-10


def test_dbf_residual_random_and_order(rng):
    H = random_pauli_sum(3, rng)
    psi = random_state(3, rng)
    r1 = ite_dbf_residual(H, psi, 0.2, 1e-4)
    r2 = ite_dbf_residual(H, psi, 0.2, 5e-5)
    assert r1 <= 1e-6
    assert 3.5 <= r1 / r2 <= 4.5


def test_hastings_heisenberg_l4():
    dos, tau, ok = hastings_analysis(heisenberg_chain(4), singlet_state(4), 0.01)
    assert ok
    assert dos.counts.sum() == 16 and dos.counts[0] >= 1
    assert dos.satisfies()
    assert not dos.satisfies(0.99 * dos.c_h)


def test_hastings_monotone_in_delta():
    _, t_small, _ = hastings_analysis(heisenberg_chain(4), singlet_state(4), 0.01)
    _, t_big, _ = hastings_analysis(heisenberg_chain(4), singlet_state(4), 1.0)
    assert t_big < t_small


def test_two_level_fit():
    dos = density_of_states([0.0, 1.0], num_qubits=1)
    assert dos.c_h == pytest.approx(1.0)
    dos = density_of_states([0.0, 1.0], num_qubits=3)
    assert dos.c_h == pytest.approx(1 / 3)


def test_hastings_duration_formula():
    dos = density_of_states([0.0, 1.0], num_qubits=1)
    assert hastings_duration(dos, 0.5, 0.1) == pytest.approx(math.log(1 / math.log1p(0.05)) / 2)


def test_hastings_zero_overlap():
    H = PauliSum(1, ((1.0, PauliString.from_label("Z")),))
    with pytest.raises(ValueError, match="overlap"):
        hastings_analysis(H, basis_state(1, 0), 0.1)
