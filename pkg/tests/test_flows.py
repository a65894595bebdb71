import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_from_labels
from dbqite.flows import (
    DegenerateGroundStateError,
    Schedule,
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
    PauliSum,
    energy_and_variance,
    heisenberg_chain,
    random_gapped_hamiltonian,
    random_pauli_sum,
    shift,
    spectral_summary,
)
from dbqite.statevector import PauliString, fidelity, random_state, singlet_state

seeds = st.integers(0, 2**32 - 1)


def dense_dbi(H, psi, s):
    M = dense_from_labels(H)
    v = psi.amplitudes
    P = np.outer(v, v.conj())
    return sla.expm(s * (P @ M - M @ P)) @ v


def dense_product(H, psi, t_h, t_w):
    M = dense_from_labels(H)
    v = psi.amplitudes
    P = np.outer(v, v.conj())
    U = sla.expm(1j * t_h * M)
    return U @ sla.expm(1j * t_w * P) @ U.conj().T @ v


# steps


def test_dbi_step_zero_and_eigenstate():
    H = heisenberg_chain(4)
    psi = singlet_state(4)
    assert np.array_equal(dbi_step(H, psi, 0.0).amplitudes, psi.amplitudes)
    gs = spectral_summary(H).ground_state
    assert np.allclose(dbi_step(H, gs, 0.8).amplitudes, gs.amplitudes, atol=1e-12)


@settings(max_examples=40)
@given(seeds, st.integers(2, 4), st.floats(0, 0.5))
def test_dbi_step_matches_dense(seed, L, s):
    rng = np.random.default_rng(seed)
    H = random_pauli_sum(L, rng)
    psi = random_state(L, rng)
    out = dbi_step(H, psi, s)
    assert np.linalg.norm(out.amplitudes - dense_dbi(H, psi, s)) <= 1e-10
    assert abs(out.norm() - 1) <= 1e-9


def test_dbqite_step_zero():
    psi = singlet_state(4)
    assert np.array_equal(dbqite_step(heisenberg_chain(4), psi, 0.0, 0.0).amplitudes, psi.amplitudes)


def test_dbqite_step_eigenstate_phase():
    H = heisenberg_chain(4)
    s = spectral_summary(H)
    Hs = H.shifted(-s.lambda0)
    out = dbqite_step(Hs, s.ground_state, 0.3, 0.3)
    assert np.allclose(out.amplitudes, np.exp(0.3j) * s.ground_state.amplitudes, atol=1e-12)
    assert fidelity(out, s.ground_state) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50)
@given(seeds, st.integers(2, 4), st.floats(0, 0.5), st.floats(0.1, 10))
def test_compact_step_matches_product(seed, L, s, ratio):
    rng = np.random.default_rng(seed)
    H = random_pauli_sum(L, rng).shifted(float(rng.normal()))
    psi = random_state(L, rng)
    t_h, t_w = math.sqrt(s / ratio), math.sqrt(s * ratio)
    out = dbqite_step(H, psi, t_h, t_w, "exact")
    assert np.linalg.norm(out.amplitudes - dense_product(H, psi, t_h, t_w)) <= 1e-10
    assert abs(out.norm() - 1) <= 1e-9


def test_compact_step_random_l4_s004(rng):
    H = random_pauli_sum(4, rng)
    psi = random_state(4, rng)
    out = dbqite_step(H, psi, 0.2, 0.2)
    assert np.linalg.norm(out.amplitudes - dense_product(H, psi, 0.2, 0.2)) <= 1e-10


# group-commutator bound


def test_gci_trivial_cases():
    H = heisenberg_chain(3)
    psi = random_state(3, np.random.default_rng(0))
    assert gci_operator_error(H, psi, 0.0) == (pytest.approx(0.0, abs=1e-14), 0.0)
    gs = spectral_summary(H).ground_state
    lhs, _ = gci_operator_error(H, gs, 0.1)
    assert lhs <= 1e-12


def test_gci_bound_on_log_grid(rng):
    for _ in range(3):
        H = random_pauli_sum(3, rng)
        psi = random_state(3, rng)
        for s in np.geomspace(1e-3, 0.3, 10):
            lhs, rhs = gci_operator_error(H, psi, s)
            assert lhs <= rhs


def test_gci_rejects_large_l():
    with pytest.raises(ValueError):
        gci_operator_error(heisenberg_chain(5), singlet_state(4).amplitudes.repeat(2) / np.sqrt(2), 0.1)


# grid search and HVA


def test_grid_single_candidate():
    H = heisenberg_chain(4)
    s, _, _ = grid_search_step(H, singlet_state(4), [0.05])
    assert s == 0.05


def test_grid_dominates_member():
    H = random_gapped_hamiltonian(4, np.random.default_rng(2))
    psi = random_state(4, np.random.default_rng(3))
    summ = spectral_summary(H)
    s_th = summ.gap / (12 * summ.width**3)
    cands = list(np.geomspace(1e-4, 1, 8)) + [s_th]
    _, _, e = grid_search_step(H, psi, cands)
    t = math.sqrt(s_th)
    e_th, _ = energy_and_variance(H, dbqite_step(H, psi, t, t))
    assert e <= e_th + 1e-12


def test_grid_tie_prefers_smallest():
    # eigenstate: every candidate gives the same energy
    H = heisenberg_chain(2)
    s, _, _ = grid_search_step(H, singlet_state(2), [0.3, 0.1, 0.2])
    assert s == 0.1


def test_grid_keeps_energy_raising_minimizer():
    H = heisenberg_chain(4)
    gs = spectral_summary(H).ground_state
    Hs = H.shifted(-spectral_summary(H).lambda0)
    s, _, e = grid_search_step(Hs, gs, [5.0, 7.0])
    assert s in (5.0, 7.0) and e >= -1e-9


def test_first_step_removes_excess_energy_l10():
    H = heisenberg_chain(10)
    summ = spectral_summary(H)
    psi = singlet_state(10)
    e0, _ = energy_and_variance(H, psi)
    sch = Schedule.grid()
    _, _, e1 = grid_search_step(H, psi, sch.candidates(summ.gap), "trotter2(2)", sch.alpha, sch.beta)
    assert (e0 - e1) >= 0.3 * (e0 - summ.lambda0)


def test_hva_origin_is_singlet():
    H = heisenberg_chain(4)
    state, t0, t1 = hva_state(H, 4, [(0.0, 0.0)])
    assert (t0, t1) == (0.0, 0.0)
    assert np.allclose(state.amplitudes, singlet_state(4).amplitudes, atol=1e-15)


def test_hva_lowers_energy_l4():
    H = heisenberg_chain(4)
    state, _, _ = hva_state(H, 4, [(a, b) for a in np.linspace(0, np.pi, 9) for b in np.linspace(0, np.pi, 9)])
    assert energy_and_variance(H, state)[0] <= energy_and_variance(H, singlet_state(4))[0]


def test_hva_beats_singlet_l10():
    H = heisenberg_chain(10)
    gs = spectral_summary(H).ground_state
    state, _, _ = hva_state(H, 10)
    assert fidelity(state, gs) > fidelity(singlet_state(10), gs)


def test_hva_needs_even_l():
    with pytest.raises(ValueError):
        hva_state(heisenberg_chain(3), 3)


# run_flow


def test_run_flow_zero_steps():
    tr = run_flow(heisenberg_chain(4), singlet_state(4), steps=0)
    assert len(tr.records) == 1 and tr.records[0].k == 0 and tr.records[0].s_k == 0.0


def test_run_flow_record_invariants():
    tr = run_flow(heisenberg_chain(6), singlet_state(6), "dbqite", Schedule.grid(), 3, "exact")
    assert [r.k for r in tr.records] == [0, 1, 2, 3]
    for r in tr.records:
        assert r.V_k >= 0 and 0 <= r.F_k <= 1 + 1e-12
    for r in tr.records[1:]:
        assert r.t_H * r.t_omega == pytest.approx(r.s_k)
        assert r.t_omega / r.t_H == pytest.approx(10.0)


def test_run_flow_degenerate_theorem_schedule():
    H = PauliSum(2, ((1.0, PauliString.from_label("ZI")),))
    with pytest.raises(DegenerateGroundStateError, match="unique ground state required"):
        run_flow(H, random_state(2, np.random.default_rng(0)), "dbqite", Schedule("theorem2"), 2)


def test_run_flow_degenerate_ok_for_fixed():
    H = PauliSum(2, ((1.0, PauliString.from_label("ZI")),))
    tr = run_flow(H, random_state(2, np.random.default_rng(0)), "dbqite", Schedule.fixed(0.1), 2)
    assert len(tr.records) == 3


@pytest.mark.parametrize("engine", ["dbi", "dbqite"])
def test_affine_invariance(engine):
    rng = np.random.default_rng(11)
    H = random_pauli_sum(4, rng)
    psi = random_state(4, rng)
    c = 3.7
    a = run_flow(H, psi, engine, Schedule.fixed(0.05), 4, "exact")
    b = run_flow(shift(H, c), psi, engine, Schedule.fixed(0.05), 4, "exact")
    assert np.linalg.norm(a.final_state.amplitudes - b.final_state.amplitudes) <= 1e-10
    assert np.allclose(b.column("E_k") - a.column("E_k"), c, atol=1e-10)
    assert np.allclose(a.column("F_k"), b.column("F_k"), atol=1e-12)


@pytest.mark.parametrize("engine", ["dbi", "dbqite"])
def test_linear_order_fidelity_gain(engine):
    # with lambda0 = 0 the fidelity gain per unit s tends to 2 E F
    rng = np.random.default_rng(5)
    H = random_gapped_hamiltonian(3, rng)
    psi = random_state(3, rng)
    g = spectral_summary(H).ground_state
    f0 = fidelity(g, psi)
    e0, _ = energy_and_variance(H, psi)

    def slope(s):
        if engine == "dbi":
            out = dbi_step(H, psi, s)
        else:
            out = dbqite_step(H, psi, math.sqrt(s), math.sqrt(s))
        return (fidelity(g, out) - f0) / s

    s = 1e-3
    extrapolated = 2 * slope(s / 2) - slope(s)
    assert extrapolated == pytest.approx(2 * e0 * f0, rel=1e-4)


# theorem checkers


def test_theorem2_ground_init_passes():
    H = random_gapped_hamiltonian(3, np.random.default_rng(1))
    summ = spectral_summary(H)
    tr = run_flow(H, summ.ground_state, "dbqite", Schedule("theorem2"), 5, "exact", summ)
    rep = verify_theorem2(tr, summ)
    assert rep.passed and np.allclose(tr.column("F_k"), 1.0)


def test_theorem2_heisenberg_l4_margin():
    H = heisenberg_chain(4)
    summ0 = spectral_summary(H)
    Hs = H.shifted(-summ0.lambda0)
    summ = spectral_summary(Hs)
    tr = run_flow(Hs, singlet_state(4), "dbqite", Schedule("theorem2"), 10, "exact", summ)
    rep = verify_theorem2(tr, summ)
    assert rep.passed and rep.checks
    assert all(c.margin >= 0 for c in rep.checks)


def test_theorem2_flags_wrong_schedule():
    H = random_gapped_hamiltonian(3, np.random.default_rng(1))
    summ = spectral_summary(H)
    tr = run_flow(H, random_state(3, np.random.default_rng(2)), "dbqite", Schedule.fixed(0.1), 3,
                  "exact", summ)
    rep = verify_theorem2(tr, summ)
    assert not rep.passed and not rep.checks
    assert any("gap / (12 W^3)" in n for n in rep.notes)


def test_theorem1_eigenstate_vacuous():
    H = random_gapped_hamiltonian(3, np.random.default_rng(1))
    summ = spectral_summary(H)
    tr = run_flow(H, summ.ground_state, "dbqite", Schedule("theorem1"), 3, "exact", summ)
    rep = verify_theorem1(tr, H, summ)
    assert rep.passed and all(c.status == "vacuous" for c in rep.checks)


def test_theorem1_heisenberg_l6():
    H = heisenberg_chain(6)
    summ = spectral_summary(H)
    tr = run_flow(H, singlet_state(6), "dbqite", Schedule("theorem1"), 5, "exact", summ)
    rep = verify_theorem1(tr, H, summ)
    assert rep.passed and not rep.unchecked


def test_theorem1_marks_oversized_steps_unchecked():
    H = heisenberg_chain(4)
    summ = spectral_summary(H)
    tr = run_flow(H, singlet_state(4), "dbqite", Schedule.fixed(0.3), 2, "exact", summ)
    rep = verify_theorem1(tr, H, summ)
    assert rep.unchecked == [0, 1]


def test_dbi_theorems_eigenstate_vacuous():
    H = heisenberg_chain(4)
    summ = spectral_summary(H)
    tr = run_flow(H, summ.ground_state, "dbi", Schedule("dbi_frr"), 3, "exact", summ)
    rep = verify_dbi_theorems(tr, summ)
    assert rep.passed and all(c.status == "vacuous" for c in rep.checks)


def test_dbi_theorems_heisenberg_l4():
    H = heisenberg_chain(4)
    summ0 = spectral_summary(H)
    Hs = H.shifted(-summ0.lambda0)
    summ = spectral_summary(Hs)
    frr = run_flow(Hs, singlet_state(4), "dbi", Schedule("dbi_frr"), 8, "exact", summ)
    assert verify_dbi_theorems(frr, summ).passed
    fid = run_flow(Hs, singlet_state(4), "dbi", Schedule("dbi_theorem"), 8, "exact", summ)
    rep = verify_dbi_theorems(fid, summ)
    assert rep.passed
    assert sum(1 for c in rep.checks if c.status == "checked") >= 9


def test_report_summary_text():
    H = heisenberg_chain(4)
    summ = spectral_summary(H)
    tr = run_flow(H, singlet_state(4), "dbqite", Schedule("theorem1"), 2, "exact", summ)
    assert verify_theorem1(tr, H, summ).summary().startswith("theorem1_frr: PASS")
