"""Seeded property suites over random Hamiltonians.

Instance ``i`` of a suite draws everything from child ``i`` of
``SeedSequence(seed).spawn(n)``, so a failure is reproduced from
``(seed, instance)`` alone.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from dbqite.flows import (
    DegenerateGroundStateError,
    Schedule,
    dbi_step,
    dbqite_step,
    gci_operator_error,
    run_flow,
    verify_dbi_theorems,
    verify_theorem1,
    verify_theorem2,
)
from dbqite.hamiltonian import (
    PauliSum,
    random_gapped_hamiltonian,
    random_pauli_sum,
    spectral_summary,
)
from dbqite.ite import ite_dbf_residual, ite_frr_residual
from dbqite.lemmas import bracket_perturbation, bracket_variance, dbi_remainder, ground_fidelity_bounds
from dbqite.statevector import random_state

SUITES = ("frr", "fidelity", "lemmas", "all")

ITE_SIZES = (2, 3, 4)
THEOREM_SIZES = (3, 4, 5)
DBI_SIZES = (3, 4)
ITE_TAUS = (0.0, 0.1, 0.5)
THEOREM_STEPS = 10
GCI_GRID = tuple(np.geomspace(1e-3, 0.3, 10))
EQUIV_TOL = 1e-10


@dataclass
class Failure:
    check: str
    instance: int
    L: int
    params: dict
    detail: str

    def line(self, seed: int) -> str:
        p = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                      for k, v in self.params.items())
        extra = f", {p}" if p else ""
        return f"FAIL {self.check}: seed={seed} instance={self.instance} L={self.L}{extra}: {self.detail}"


@dataclass
class VerifyReport:
    suite: str
    seed: int
    counts: dict = field(default_factory=dict)
    failures: list[Failure] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, check: str, ok: bool, failure: Failure | None = None):
        self.counts[check] = self.counts.get(check, 0) + 1
        if not ok:
            self.failures.append(failure)

    def lines(self) -> list[str]:
        out = [f"{name}: {n} checks" for name, n in self.counts.items()]
        out += [f.line(self.seed) for f in self.failures]
        out.append(f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'} "
                   f"({sum(self.counts.values())} checks, {len(self.failures)} failures, "
                   f"{self.elapsed:.1f} s)")
        return out


def instance_rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _sizes(default, sizes, cap=None):
    out = tuple(sizes) if sizes else default
    if cap is not None:
        out = tuple(L for L in out if L <= cap) or default
    return out


def ite_ensemble(seed: int, n: int = 20, sizes=None):
    """(instance, H, psi0) triples of random Pauli sums with Haar-random states."""
    Ls = _sizes(ITE_SIZES, sizes)
    for i, rng in enumerate(instance_rngs(seed, n)):
        L = Ls[i % len(Ls)]
        yield i, random_pauli_sum(L, rng), random_state(L, rng)


def gapped_ensemble(seed: int, n: int = 20, sizes=None):
    """(instance, H, psi0) triples with lambda0 = 0, width >= 1 and a unique ground state."""
    Ls = _sizes(THEOREM_SIZES, sizes)
    for i, rng in enumerate(instance_rngs(seed, n)):
        L = Ls[i % len(Ls)]
        yield i, random_gapped_hamiltonian(L, rng), random_state(L, rng)


def check_ite_frr(rep: VerifyReport, seed, n, sizes=None, dtau=1e-5):
    for i, H, psi0 in ite_ensemble(seed, n, sizes):
        for tau in ITE_TAUS:
            lhs, rhs = ite_frr_residual(H, psi0, tau, dtau)
            v = -rhs / 2
            err = abs(lhs - rhs)
            ok = err <= 1e-3 * max(1.0, v)
            rep.record("ite_frr", ok, None if ok else Failure(
                "ite_frr", i, H.num_qubits, {"tau": tau},
                f"|dE/dtau + 2V| = {err:.3g} > {1e-3 * max(1.0, v):.3g}"))


def check_ite_dbf(rep: VerifyReport, seed, n, sizes=None, dtau=1e-4):
    for i, H, psi0 in ite_ensemble(seed, n, sizes):
        for tau in ITE_TAUS:
            r1 = ite_dbf_residual(H, psi0, tau, dtau)
            r2 = ite_dbf_residual(H, psi0, tau, dtau / 2)
            ok = r1 <= 1e-6
            rep.record("ite_dbf_residual", ok, None if ok else Failure(
                "ite_dbf_residual", i, H.num_qubits, {"tau": tau}, f"residual {r1:.3g} > 1e-6"))
            # the ratio is only meaningful above the rounding floor
            if r1 > 1e-10:
                ratio = r1 / r2
                ok = 3.5 <= ratio <= 4.5
                rep.record("ite_dbf_order", ok, None if ok else Failure(
                    "ite_dbf_order", i, H.num_qubits, {"tau": tau},
                    f"halving dtau changed the residual by {ratio:.3g}, expected about 4"))


def _theorem_failure(name, i, H, report, extra=None):
    return Failure(name, i, H.num_qubits, extra or {}, report.summary())


def check_theorem1(rep: VerifyReport, seed, n, sizes=None):
    for i, H, psi0 in gapped_ensemble(seed, n, sizes):
        summary = spectral_summary(H)
        trace = run_flow(H, psi0, "dbqite", Schedule("theorem1"), THEOREM_STEPS, "exact", summary)
        r = verify_theorem1(trace, H, summary)
        ok = r.passed and not r.unchecked
        rep.record("theorem1_frr", ok, None if ok else _theorem_failure("theorem1_frr", i, H, r))


def check_dbi_frr(rep: VerifyReport, seed, n, sizes=None):
    for i, H, psi0 in gapped_ensemble(seed, n, _sizes(DBI_SIZES, sizes)):
        summary = spectral_summary(H)
        trace = run_flow(H, psi0, "dbi", Schedule("dbi_frr"), THEOREM_STEPS, "exact", summary)
        r = verify_dbi_theorems(trace, summary)
        ok = r.passed and not r.unchecked
        rep.record("dbi_frr", ok, None if ok else _theorem_failure("dbi_frr", i, H, r))


def check_theorem2(rep: VerifyReport, seed, n, sizes=None, hamiltonian: PauliSum | None = None):
    if hamiltonian is None:
        ensemble = gapped_ensemble(seed, n, sizes)
    else:
        L = hamiltonian.num_qubits
        ensemble = ((i, hamiltonian, random_state(L, rng))
                    for i, rng in enumerate(instance_rngs(seed, n)))
    for i, H, psi0 in ensemble:
        summary = spectral_summary(H)
        try:
            trace = run_flow(H.shifted(-summary.lambda0), psi0, "dbqite", Schedule("theorem2"),
                             THEOREM_STEPS, "exact")
        except DegenerateGroundStateError as exc:
            rep.record("theorem2", False, Failure("theorem2", i, H.num_qubits, {}, str(exc)))
            return
        shifted = spectral_summary(H.shifted(-summary.lambda0))
        r = verify_theorem2(trace, shifted)
        rep.record("theorem2", r.passed, None if r.passed else _theorem_failure("theorem2", i, H, r))


def check_dbi_fidelity(rep: VerifyReport, seed, n, sizes=None):
    for i, H, psi0 in gapped_ensemble(seed, n, _sizes(DBI_SIZES, sizes)):
        summary = spectral_summary(H)
        trace = run_flow(H, psi0, "dbi", Schedule("dbi_theorem"), THEOREM_STEPS, "exact", summary)
        r = verify_dbi_theorems(trace, summary)
        # the fixed step may exceed the cooling-rate bound; only the fidelity bound is required here
        rep.record("dbi_fidelity", r.passed, None if r.passed else _theorem_failure("dbi_fidelity", i, H, r))


def dense_dbqite_product(H: PauliSum, psi, s: float) -> np.ndarray:
    """exp(i sqrt(s) H) exp(i sqrt(s) psi psi^dag) exp(-i sqrt(s) H) psi with dense matrices."""
    Hd = H.to_dense().astype(np.complex128)
    v = np.asarray(psi, dtype=np.complex128)
    r = math.sqrt(s)
    eH = sla.expm(1j * r * Hd)
    eS = sla.expm(1j * r * np.outer(v, v.conj()))
    return eH @ (eS @ (eH.conj().T @ v))


def dense_dbi_step(H: PauliSum, psi, s: float) -> np.ndarray:
    """exp(s [psi psi^dag, H]) psi with a dense matrix exponential."""
    Hd = H.to_dense().astype(np.complex128)
    v = np.asarray(psi, dtype=np.complex128)
    P = np.outer(v, v.conj())
    return sla.expm(s * (P @ Hd - Hd @ P)) @ v


def check_step_equivalence(rep: VerifyReport, seed, n=50, sizes=None):
    Ls = _sizes((2, 3, 4), sizes, cap=4)
    for i, rng in enumerate(instance_rngs(seed, n)):
        L = Ls[i % len(Ls)]
        H = random_pauli_sum(L, rng)
        psi = random_state(L, rng)
        s = float(rng.uniform(0.0, 0.5))
        t = math.sqrt(s)
        diff = np.linalg.norm(dbqite_step(H, psi, t, t, "exact").amplitudes
                              - dense_dbqite_product(H, psi.amplitudes, s))
        ok = diff <= EQUIV_TOL
        rep.record("compact_step", ok, None if ok else Failure(
            "compact_step", i, L, {"s": s}, f"difference {diff:.3g}"))
        diff = np.linalg.norm(dbi_step(H, psi, s).amplitudes - dense_dbi_step(H, psi.amplitudes, s))
        ok = diff <= EQUIV_TOL
        rep.record("dbi_step_oracle", ok, None if ok else Failure(
            "dbi_step_oracle", i, L, {"s": s}, f"difference {diff:.3g}"))


def check_gci(rep: VerifyReport, seed, n=10, L=3):
    for i, rng in enumerate(instance_rngs(seed, n)):
        H = random_pauli_sum(L, rng)
        psi = random_state(L, rng)
        for s in GCI_GRID:
            lhs, rhs = gci_operator_error(H, psi, float(s))
            ok = lhs <= rhs * (1 + 1e-12)
            rep.record("gci_bound", ok, None if ok else Failure(
                "gci_bound", i, L, {"s": float(s)}, f"lhs {lhs:.3g} > rhs {rhs:.3g}"))


def check_bracket_lemmas(rep: VerifyReport, seed, n=20, sizes=None):
    Ls = _sizes((2, 3, 4), sizes, cap=4)
    for i, rng in enumerate(instance_rngs(seed, n)):
        L = Ls[i % len(Ls)]
        H = random_gapped_hamiltonian(L, rng)
        psi = random_state(L, rng)
        lhs, rhs = bracket_variance(H, psi)
        ok = abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)
        rep.record("bracket_variance", ok, None if ok else Failure(
            "bracket_variance", i, L, {}, f"{lhs:.12g} != {rhs:.12g}"))
        lhs, rhs = bracket_perturbation(H, psi)
        ok = lhs <= rhs + 1e-12
        rep.record("bracket_perturbation", ok, None if ok else Failure(
            "bracket_perturbation", i, L, {}, f"{lhs:.6g} > {rhs:.6g}"))
        for r in (1e-3, 1e-2, 0.1, 1.0):
            lhs, rhs = dbi_remainder(H, psi, r)
            ok = lhs <= rhs * (1 + 1e-9) + 1e-14
            rep.record("dbi_remainder", ok, None if ok else Failure(
                "dbi_remainder", i, L, {"r": r}, f"{lhs:.6g} > {rhs:.6g}"))
        for name, (lhs, rhs) in ground_fidelity_bounds(H, psi).items():
            ok = lhs <= rhs + 1e-12 * max(1.0, abs(rhs))
            rep.record(f"ground_fidelity_{name}", ok, None if ok else Failure(
                f"ground_fidelity_{name}", i, L, {}, f"{lhs:.6g} > {rhs:.6g}"))


def load_hamiltonian(path: str | Path) -> PauliSum:
    return PauliSum.from_dict(json.loads(Path(path).read_text()))


def run_suite(suite: str, seed: int = 1234, n_seeds: int = 20, sizes=None,
              hamiltonian: PauliSum | None = None) -> VerifyReport:
    """Run one suite (or ``all``) and collect every failure with its instance."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    start = time.perf_counter()
    rep = VerifyReport(suite, seed)
    if suite in ("frr", "all"):
        check_ite_frr(rep, seed, n_seeds, sizes)
        check_ite_dbf(rep, seed, n_seeds, sizes)
        check_theorem1(rep, seed, n_seeds, sizes)
        check_dbi_frr(rep, seed, n_seeds, sizes)
    if suite in ("fidelity", "all"):
        check_theorem2(rep, seed, n_seeds, sizes, hamiltonian)
        if hamiltonian is None:
            check_dbi_fidelity(rep, seed, n_seeds, sizes)
    if suite in ("lemmas", "all"):
        check_step_equivalence(rep, seed, max(n_seeds, 50), sizes)
        check_gci(rep, seed, min(n_seeds, 10))
        check_bracket_lemmas(rep, seed, n_seeds, sizes)
    rep.elapsed = time.perf_counter() - start
    return rep
