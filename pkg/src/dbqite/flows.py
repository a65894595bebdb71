"""Discrete double-bracket flows: the DBI recursion and DB-QITE, schedules and theorem checks.

Step records use the convention that ``records[k].s_k`` is the duration of
the step that produced state ``k``; the initialization record carries 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla

from dbqite.hamiltonian import (
    Evolution,
    PauliSum,
    SpectralSummary,
    apply_hamiltonian,
    bond_restriction,
    dense_threshold,
    energy_and_variance,
    evolve,
    evolve_commuting,
    spectral_summary,
)
from dbqite.statevector import StateVector, as_array, singlet_state

ENGINES = ("dbi", "dbqite")
SCHEDULE_KINDS = ("fixed", "theorem2", "theorem1", "dbi_theorem", "dbi_frr", "grid")
THEOREM_KINDS = ("theorem2", "theorem1", "dbi_theorem")

# slack for rounding in all inequality checks, relative to the energy scale
CHECK_RTOL = 1e-12
TIE_RTOL = 1e-12


class DegenerateGroundStateError(ValueError):
    def __init__(self, message="unique ground state required"):
        super().__init__(message)


@dataclass(frozen=True)
class Schedule:
    """Step-duration rule.

    ``fixed`` uses ``s``; ``theorem2`` uses gap / (12 W**3) and ``dbi_theorem``
    uses sqrt(F0) / (4 W), with W the spectral width lambda_max - lambda0.
    ``theorem1`` and ``dbi_frr`` take the largest step allowed by the
    respective cooling-rate conditions at every step. ``grid`` scans
    ``points`` geometric candidates from ``s_max * s_min_ratio`` to ``s_max``
    (default ``s_max = 1 / gap``) and keeps the lowest energy.

    DB-QITE steps use t_H = sqrt(s beta / alpha) and t_omega = sqrt(s alpha / beta).
    """

    kind: str = "grid"
    s: float | None = None
    points: int = 20
    s_max: float | None = None
    s_min_ratio: float = 1.0 / 400.0
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "fixed" and (self.s is None or self.s < 0):
            raise ValueError("fixed schedule needs s >= 0")
        if self.points < 1:
            raise ValueError("grid points must be >= 1")
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")
        if self.s_max is not None and self.s_max <= 0:
            raise ValueError("s_max must be positive")
        if not 0 < self.s_min_ratio <= 1:
            raise ValueError("s_min_ratio must lie in (0, 1]")

    @classmethod
    def fixed(cls, s: float, alpha: float = 1.0, beta: float = 1.0) -> Schedule:
        return cls("fixed", s=s, alpha=alpha, beta=beta)

    @classmethod
    def grid(cls, points: int = 20, s_max: float | None = None, alpha: float = 10.0,
             beta: float = 1.0, s_min_ratio: float = 1.0 / 400.0) -> Schedule:
        return cls("grid", points=points, s_max=s_max, alpha=alpha, beta=beta,
                   s_min_ratio=s_min_ratio)

    def candidates(self, gap: float) -> np.ndarray:
        s_max = self.s_max if self.s_max is not None else 1.0 / gap
        if self.points == 1:
            return np.array([s_max])
        return np.geomspace(s_max * self.s_min_ratio, s_max, self.points)

    def sub_durations(self, s: float) -> tuple[float, float]:
        return math.sqrt(s * self.beta / self.alpha), math.sqrt(s * self.alpha / self.beta)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StepRecord:
    k: int
    s_k: float
    E_k: float
    V_k: float
    F_k: float
    t_H: float = 0.0
    t_omega: float = 0.0


@dataclass
class FlowTrace:
    engine: str
    schedule: Schedule
    records: list[StepRecord]
    final_state: StateVector
    evolution: str = "exact"
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def dbi_step(H: PauliSum, psi, s: float) -> StateVector:
    """exp(s [psi psi^dag, H]) psi, evaluated exactly in span{psi, H psi}.

    With r = (H - E) psi the generator maps psi to -r and r/|r| to |r| psi,
    so the step is a plane rotation by angle s |r|.
    """
    arr = as_array(psi)
    h = apply_hamiltonian(H, arr)
    E = np.vdot(arr, h).real
    r = h - E * arr
    nr = np.linalg.norm(r)
    if nr == 0.0 or s == 0.0:
        return StateVector(arr)
    theta = s * nr
    return StateVector(math.cos(theta) * arr - math.sin(theta) * (r / nr), copy=False)


def dbqite_step(H: PauliSum, psi, t_h: float, t_omega: float, evo="exact") -> StateVector:
    """exp(i t_h H) exp(i t_omega psi psi^dag) exp(-i t_h H) psi using one evolution.

    psi' = psi - (1 - e^{i t_omega}) conj(<psi|U|psi>) U psi with U = exp(i t_h H).
    The identity offset of H cancels exactly and is dropped before evolving.
    """
    arr = as_array(psi)
    if t_h == 0.0 and t_omega == 0.0:
        return StateVector(arr)
    u_psi = evolve(H.without_offset(), arr, t_h, evo).amplitudes
    phi = np.conj(np.vdot(arr, u_psi))
    out = arr - (1.0 - np.exp(1j * t_omega)) * phi * u_psi
    return StateVector(out, copy=False)


def _projector(psi) -> np.ndarray:
    v = as_array(psi)
    return np.outer(v, v.conj())


def _opnorm(A) -> float:
    return float(np.linalg.norm(A, 2))


def gci_operator_error(H: PauliSum, psi, s: float) -> tuple[float, float]:
    """Operator-norm distance between the group commutator and the bracket exponential.

    lhs = ||G_s - exp(s[sigma, H])|| with
    G_s = exp(i sqrt(s) H) exp(i sqrt(s) sigma) exp(-i sqrt(s) H) exp(-i sqrt(s) sigma);
    rhs = s**1.5 (||[H,[H,sigma]]|| + ||[sigma,[sigma,H]]||).
    """
    if H.num_qubits > 4:
        raise ValueError("gci_operator_error is dense and limited to L <= 4")
    Hd = H.to_dense().astype(np.complex128)
    sig = _projector(psi)
    r = math.sqrt(s)
    eH = sla.expm(1j * r * Hd)
    eS = sla.expm(1j * r * sig)
    G = eH @ eS @ eH.conj().T @ eS.conj().T
    W = sig @ Hd - Hd @ sig
    lhs = _opnorm(G - sla.expm(s * W))
    hs = Hd @ sig - sig @ Hd
    rhs = s**1.5 * (_opnorm(Hd @ hs - hs @ Hd) + _opnorm(sig @ (-hs) - (-hs) @ sig))
    return lhs, rhs


def grid_search_step(H: PauliSum, psi, candidates, evo="exact", alpha: float = 1.0,
                     beta: float = 1.0, engine: str = "dbqite"):
    """Try every candidate duration and keep the lowest resulting energy.

    Ties (energies equal to within TIE_RTOL) go to the smallest s. The minimizer is returned even if it raises
    the energy. Returns ``(best_s, state, energy)``.
    """
    cands = sorted(float(c) for c in candidates)
    if not cands:
        raise ValueError("candidates must be non-empty")
    best = None
    for s in cands:
        if engine == "dbqite":
            t_h, t_w = math.sqrt(s * beta / alpha), math.sqrt(s * alpha / beta)
            nxt = dbqite_step(H, psi, t_h, t_w, evo)
        else:
            nxt = dbi_step(H, psi, s)
        e = float(np.vdot(nxt.amplitudes, apply_hamiltonian(H, nxt)).real)
        # energies within rounding of the incumbent count as ties
        if best is None or e < best[2] - TIE_RTOL * max(1.0, abs(best[2])):
            best = (s, nxt, e)
    return best


def hva_grid(points: int = 41) -> list[tuple[float, float]]:
    """Product grid over [0, pi) for both angles; each angle has period pi on the chain."""
    ts = np.linspace(0.0, np.pi, points, endpoint=False)
    return [(float(a), float(b)) for a in ts for b in ts]


def hva_state(H: PauliSum, L: int, grid=None):
    """Lowest-energy exp(-i t0 H0) exp(-i t1 H1)|singlet> over a grid of (t0, t1) pairs.

    H0 holds the bonds inside singlet pairs and H1 the bonds between them.
    Returns ``(state, t0, t1)``; ties keep the first pair in grid order.
    """
    if L % 2 or L != H.num_qubits:
        raise ValueError("hva_state needs an even L matching the Hamiltonian")
    pairs = hva_grid() if grid is None else [(float(a), float(b)) for a, b in grid]
    if not pairs:
        raise ValueError("grid must be non-empty")
    H0, H1 = bond_restriction(H, 0), bond_restriction(H, 1)
    singlet = singlet_state(L)
    inner: dict[float, StateVector] = {}
    best = None
    for t0, t1 in pairs:
        if t1 not in inner:
            inner[t1] = evolve_commuting(H1, singlet, -t1)
        cand = evolve_commuting(H0, inner[t1], -t0)
        e = float(np.vdot(cand.amplitudes, apply_hamiltonian(H, cand)).real)
        if best is None or e < best[0]:
            best = (e, cand, t0, t1)
    return best[1], best[2], best[3]


def _auto_summary(H: PauliSum) -> SpectralSummary:
    mode = "dense" if H.num_qubits <= dense_threshold() else "iterative"
    return spectral_summary(H, mode)


def run_flow(H: PauliSum, psi0, engine: str = "dbqite", schedule: Schedule | None = None,
             steps: int = 1, evo="exact", summary: SpectralSummary | None = None) -> FlowTrace:
    """Iterate DBI or DB-QITE steps and record energy, variance and fidelity at each state."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    schedule = Schedule.grid() if schedule is None else schedule
    evo = Evolution.parse(evo)
    psi = StateVector(as_array(psi0))
    if psi.amplitudes.size != H.dim:
        raise ValueError("incompatible qubit counts")
    if summary is None:
        summary = _auto_summary(H)
    if schedule.kind in THEOREM_KINDS and summary.degenerate_ground:
        raise DegenerateGroundStateError()
    gs = summary.ground_state.amplitudes
    width, gap, nrm = summary.width, summary.gap, summary.spectral_norm

    def observe(k, state, s, t_h, t_w):
        e, v = energy_and_variance(H, state)
        f = abs(np.vdot(gs, state.amplitudes)) ** 2
        return StepRecord(k, float(s), e, v, float(f), float(t_h), float(t_w))

    records = [observe(0, psi, 0.0, 0.0, 0.0)]
    f0 = records[0].F_k
    for k in range(steps):
        rec = records[-1]
        if schedule.kind == "grid":
            s, nxt, _ = grid_search_step(H, psi, schedule.candidates(gap), evo,
                                         schedule.alpha, schedule.beta, engine)
        else:
            if schedule.kind == "fixed":
                s = schedule.s
            elif schedule.kind == "theorem2":
                s = gap / (12.0 * width**3)
            elif schedule.kind == "dbi_theorem":
                s = math.sqrt(f0) / (4.0 * width)
            elif schedule.kind == "theorem1":
                eps = 1.0 - rec.F_k
                s = 0.0 if eps <= 0 or rec.V_k == 0 else 2.0 * rec.V_k / (5.0 * eps * width**4)
                s = min(s, 2.0 / (5.0 * width**2))
            else:  # dbi_frr
                h2 = rec.V_k + rec.E_k**2
                s = 0.0 if h2 == 0 or nrm == 0 else rec.V_k / (4.0 * nrm * h2)
            if engine == "dbqite":
                nxt = dbqite_step(H, psi, *schedule.sub_durations(s), evo)
            else:
                nxt = dbi_step(H, psi, s)
        t_h, t_w = schedule.sub_durations(s) if engine == "dbqite" else (0.0, 0.0)
        psi = nxt
        records.append(observe(k + 1, psi, s, t_h, t_w))
    return FlowTrace(engine, schedule, records, psi, str(evo),
                     meta={"lambda0": summary.lambda0, "gap": gap, "width": width})


@dataclass
class StepCheck:
    k: int
    lhs: float
    rhs: float
    ok: bool
    status: str = "checked"  # checked | unchecked | vacuous

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class TheoremReport:
    name: str
    checks: list[StepCheck] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    precondition_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.precondition_ok and all(c.ok for c in self.checks if c.status != "unchecked")

    @property
    def violations(self) -> list[StepCheck]:
        return [c for c in self.checks if c.status != "unchecked" and not c.ok]

    @property
    def unchecked(self) -> list[int]:
        return [c.k for c in self.checks if c.status == "unchecked"]

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        n = sum(1 for c in self.checks if c.status != "unchecked")
        extra = f"; notes: {'; '.join(self.notes)}" if self.notes else ""
        return (f"{self.name}: {state} ({n} checks, {len(self.violations)} violations, "
                f"{len(self.unchecked)} unchecked){extra}")


def _slack(scale: float) -> float:
    return CHECK_RTOL * max(1.0, abs(scale))


def verify_theorem1(trace: FlowTrace, H: PauliSum, summary: SpectralSummary | None = None) -> TheoremReport:
    """Check E_{k+1} <= E_k - s_k V_k wherever s_k <= 2 V_k / (5 eps_k W**4).

    W is the spectral width (the norm after shifting lambda0 to zero). Steps
    that exceed the duration bound are marked unchecked.
    """
    rep = TheoremReport("theorem1_frr")
    if trace.engine != "dbqite":
        rep.precondition_ok = False
        rep.notes.append("trace is not a DB-QITE trace")
        return rep
    summary = summary or _auto_summary(H)
    recs = trace.records
    if any(not np.isfinite(r.F_k) for r in recs):
        rep.precondition_ok = False
        rep.notes.append("checker disabled: ground state unavailable")
        return rep
    width = summary.width
    scale = max(abs(summary.lambda0), width)
    for a, b in zip(recs[:-1], recs[1:]):
        s, eps = b.s_k, 1.0 - a.F_k
        lhs, rhs = b.E_k, a.E_k - s * a.V_k
        if a.V_k == 0 or eps <= 0:
            rep.checks.append(StepCheck(a.k, lhs, a.E_k, lhs <= a.E_k + _slack(scale), "vacuous"))
            continue
        bound = 2.0 * a.V_k / (5.0 * eps * width**4)
        if s > bound * (1 + 1e-9):
            rep.checks.append(StepCheck(a.k, lhs, rhs, False, "unchecked"))
            continue
        rep.checks.append(StepCheck(a.k, lhs, rhs, lhs <= rhs + _slack(scale)))
    if rep.unchecked:
        rep.notes.append(f"steps {rep.unchecked} exceed the duration bound")
    return rep


def verify_theorem2(trace: FlowTrace, summary: SpectralSummary) -> TheoremReport:
    """Check the per-step fidelity gain and the geometric convergence bound.

    Requires the fixed step s = gap / (12 W**3), W >= 1, F_0 > 0 and a unique
    ground state; otherwise the report is flagged and no bound is evaluated.
    """
    rep = TheoremReport("theorem2_fidelity")
    recs = trace.records
    width, gap = summary.width, summary.gap
    s_req = gap / (12.0 * width**3) if width > 0 else float("nan")
    problems = []
    if trace.engine != "dbqite":
        problems.append("trace is not a DB-QITE trace")
    if summary.degenerate_ground:
        problems.append("unique ground state required")
    if width < 1.0:
        problems.append(f"spectral width {width:.3g} < 1")
    if not recs[0].F_k > 0:
        problems.append("initial fidelity is zero")
    if any(not math.isclose(r.s_k, s_req, rel_tol=1e-9) for r in recs[1:]):
        problems.append("steps differ from gap / (12 W^3)")
    if any(not math.isclose(r.t_H * r.t_omega, r.s_k, rel_tol=1e-9, abs_tol=1e-300)
           for r in recs[1:]):
        problems.append("sub-durations do not multiply to s")
    if problems:
        rep.precondition_ok = False
        rep.notes.extend(problems)
        return rep
    f0 = recs[0].F_k
    q = 1.0 - s_req * f0 * gap
    tol = 1e-12
    for a, b in zip(recs[:-1], recs[1:]):
        bound = a.F_k * (1.0 + (1.0 - a.F_k) * gap**2 / (12.0 * width**3))
        rep.checks.append(StepCheck(a.k, bound, b.F_k, b.F_k >= bound - tol))
    for r in recs:
        bound = 1.0 - q**r.k
        rep.checks.append(StepCheck(r.k, bound, r.F_k, r.F_k >= bound - tol))
    return rep


def verify_dbi_theorems(trace: FlowTrace, summary: SpectralSummary) -> TheoremReport:
    """DBI cooling-rate and fidelity checks.

    Cooling: E_{k+1} - E_k <= -s_k V_k wherever s_k <= V_k / (4 ||H|| <H^2>_k).
    Fidelity (``dbi_theorem`` schedule only): F_k >= 1 - q**k with
    q = 1 - gap F_0**1.5 / (4 W).
    """
    rep = TheoremReport("dbi_theorems")
    recs = trace.records
    if trace.engine != "dbi":
        rep.precondition_ok = False
        rep.notes.append("trace is not a DBI trace")
        return rep
    nrm = summary.spectral_norm
    scale = max(nrm, abs(summary.lambda0))
    for a, b in zip(recs[:-1], recs[1:]):
        lhs, rhs = b.E_k - a.E_k, -b.s_k * a.V_k
        if a.V_k == 0:
            rep.checks.append(StepCheck(a.k, lhs, 0.0, lhs <= _slack(scale), "vacuous"))
            continue
        h2 = a.V_k + a.E_k**2
        bound = a.V_k / (4.0 * nrm * h2)
        if b.s_k > bound * (1 + 1e-9):
            rep.checks.append(StepCheck(a.k, lhs, rhs, False, "unchecked"))
            continue
        rep.checks.append(StepCheck(a.k, lhs, rhs, lhs <= rhs + _slack(scale)))
    if rep.unchecked:
        rep.notes.append(f"cooling check skipped at steps {rep.unchecked}: duration above bound")
    if trace.schedule.kind == "dbi_theorem":
        if summary.degenerate_ground:
            rep.precondition_ok = False
            rep.notes.append("unique ground state required")
            return rep
        f0, width, gap = recs[0].F_k, summary.width, summary.gap
        s0 = math.sqrt(f0) / (4.0 * width)
        if any(not math.isclose(r.s_k, s0, rel_tol=1e-9) for r in recs[1:]):
            rep.precondition_ok = False
            rep.notes.append("steps differ from sqrt(F0) / (4 W)")
            return rep
        q = 1.0 - 0.25 * (gap / width) * f0**1.5
        for r in recs:
            bound = 1.0 - q**r.k
            rep.checks.append(StepCheck(r.k, bound, r.F_k, r.F_k >= bound - 1e-12))
    else:
        rep.notes.append("fidelity check needs the dbi_theorem schedule; not evaluated")
    return rep
