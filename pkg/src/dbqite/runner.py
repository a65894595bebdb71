"""Experiment orchestration: build the model and initial state, run an engine, attach costs."""

from __future__ import annotations

import json
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from dbqite import costing
from dbqite.artifacts import RunArtifact, TraceRow, write_artifact_json, write_cost_csv, write_trace_csv
from dbqite.config import ConfigError, ExperimentConfig
from dbqite.flows import hva_grid, hva_state, run_flow
from dbqite.hamiltonian import (
    PauliSum,
    energy_and_variance,
    heisenberg_chain,
    random_gapped_hamiltonian,
    spectral_summary,
)
from dbqite.ite import ite_curve
from dbqite.qpe import qpe_spectral, rescale_hamiltonian
from dbqite.statevector import StateVector, basis_state, singlet_state


def library_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # running from a source tree
        return "0.0.0+unknown"


def streams(seed: int, n: int) -> list[np.random.Generator]:
    """Independent generators derived from one 64-bit seed via SeedSequence.spawn."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def build_model(cfg: ExperimentConfig, rng: np.random.Generator) -> PauliSum:
    m = cfg.model
    if m.type == "heisenberg":
        return heisenberg_chain(m.L)
    if m.type == "random":
        return random_gapped_hamiltonian(m.L, rng)
    try:
        data = json.loads(Path(m.file).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"model.file: cannot read {m.file} ({exc})") from exc
    return PauliSum.from_dict(data)


def load_state(path: str | Path, num_qubits: int) -> StateVector:
    """Read amplitudes from ``.npy`` or JSON ``{"real": [...], "imag": [...]}``."""
    path = Path(path)
    try:
        if path.suffix == ".npy":
            amps = np.load(path)
        else:
            d = json.loads(path.read_text())
            amps = np.asarray(d["real"], dtype=float) + 1j * np.asarray(d.get("imag", 0.0), dtype=float)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"init.file: cannot read {path} ({exc})") from exc
    amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
    if amps.size != 2**num_qubits:
        raise ConfigError(f"init.file: expected {2**num_qubits} amplitudes, got {amps.size}")
    if abs(np.linalg.norm(amps) - 1.0) > 1e-9:
        raise ConfigError("init.file: state is not normalized")
    return StateVector(amps)


def build_init(cfg: ExperimentConfig, H: PauliSum) -> tuple[StateVector, dict]:
    L = H.num_qubits
    kind = cfg.init.type
    if kind == "singlet":
        return singlet_state(L), {}
    if kind == "hva":
        state, t0, t1 = hva_state(H, L, hva_grid(cfg.init.points))
        return state, {"hva_t0": t0, "hva_t1": t1}
    if kind == "zero":
        return basis_state(L, 0), {}
    return load_state(cfg.init.file, L), {}


def _costs_available(cfg: ExperimentConfig) -> bool:
    return cfg.model.type == "heisenberg"


def _trotter_steps(cfg: ExperimentConfig) -> int:
    return cfg.evo.steps if cfg.evo.method == "trotter2" else cfg.cost.trotter_steps


def dbqite_step_costs(cfg: ExperimentConfig, L: int, kmax: int, expected: bool = False
                      ) -> list[costing.GateCounts]:
    """Cumulative circuit cost of the state after k = 0..kmax DB-QITE steps."""
    if not _costs_available(cfg):
        return [costing.ZERO] * (kmax + 1)
    hs = costing.hamsim_cost(L, _trotter_steps(cfg))
    refl = costing.reflection_cost(L, cfg.cost.reflection, expected)
    init = costing.init_cost(cfg.init.type, L)
    return [costing.dbqite_cost(k, L, hs, refl, init) for k in range(kmax + 1)]


def _cost_row(engine, L, k, c: costing.GateCounts, cz_expected=None) -> dict:
    return {"engine": engine, "L": L, "k": k, **c.as_dict(),
            "cz_expected": c.cz if cz_expected is None else cz_expected}


def run_experiment(cfg: ExperimentConfig) -> RunArtifact:
    """Run one configured experiment in memory."""
    start = time.perf_counter()
    model_rng, _ = streams(cfg.seed, 2)
    H = build_model(cfg, model_rng)
    L = H.num_qubits
    psi0, info = build_init(cfg, H)
    summary = spectral_summary(H, "dense")
    info.update({"lambda0": summary.lambda0, "lambda1": summary.lambda1, "gap": summary.gap,
                 "lambda_max": summary.lambda_max, "num_qubits": L})
    rows: list[TraceRow] = []
    qpe_rows: list[dict] = []
    cost_table: list[dict] = []
    gs = summary.ground_state.amplitudes

    if cfg.engine in ("dbi", "dbqite"):
        trace = run_flow(H, psi0, cfg.engine, cfg.schedule, cfg.steps, cfg.evo, summary)
        if cfg.engine == "dbqite":
            costs = dbqite_step_costs(cfg, L, cfg.steps)
            expected = dbqite_step_costs(cfg, L, cfg.steps, expected=True)
        else:
            # the DBI recursion has no circuit of its own
            costs = expected = [costing.ZERO] * (cfg.steps + 1)
        for r, c, ce in zip(trace.records, costs, expected):
            rows.append(TraceRow(cfg.engine, r.k, r.s_k, r.t_H, r.t_omega, r.E_k, r.V_k, r.F_k,
                                 c.cz, c.u3, c.t, c.depth))
            cost_table.append(_cost_row(cfg.engine, L, r.k, c, ce.cz))
    elif cfg.engine == "ite":
        taus = np.linspace(0.0, cfg.ite.tau_max, cfg.steps + 1)
        curve = ite_curve(H, psi0, taus, summary.ground_state)
        for k, tau in enumerate(taus):
            rows.append(TraceRow("ite", k, float(tau), 0.0, 0.0, float(curve.energies[k]),
                                 float(curve.variances[k]), float(curve.fidelities[k])))
            cost_table.append(_cost_row("ite", L, k, costing.ZERO))
    else:
        warm = cfg.qpe.warm_start_steps
        start_state = psi0
        warm_cost = costing.init_cost(cfg.init.type, L) if _costs_available(cfg) else costing.ZERO
        if warm:
            trace = run_flow(H, psi0, "dbqite", cfg.schedule, warm, cfg.evo, summary)
            start_state = trace.final_state
            warm_cost = dbqite_step_costs(cfg, L, warm)[-1]
        kappa = cfg.qpe.rescale_factor
        Hp = rescale_hamiltonian(H, summary.lambda0,
                                 summary.lambda0 + kappa * (summary.lambda_max - summary.lambda0))
        for k in range(1, cfg.qpe.precision_qubits + 1):
            res = qpe_spectral(Hp, start_state, k, kappa, keep_state=True)
            if res.post_state is not None:
                e, v = energy_and_variance(H, res.post_state)
                f = abs(np.vdot(gs, res.post_state.amplitudes)) ** 2
            else:
                e = v = f = float("nan")
            c = costing.qpe_cost(L, k, init=warm_cost) if _costs_available(cfg) else costing.ZERO
            rows.append(TraceRow("qpe", k, 0.0, 0.0, 0.0, e, v, float(f), c.cz, c.u3, c.t, c.depth))
            cost_table.append(_cost_row("qpe", L, k, c))
            qpe_rows.append(res.as_dict())
        info["warm_start_steps"] = warm
    return RunArtifact(
        config=cfg.to_dict(),
        rows=rows,
        seed=cfg.seed,
        version=library_version(),
        wall_clock=time.perf_counter() - start,
        qpe=qpe_rows,
        costs=cost_table,
        info=info,
    )


def cost_rows(cfg: ExperimentConfig, L: int, kmax: int) -> list[dict]:
    """Rows of the cost table for DB-QITE steps 0..kmax and QPE precision 1..kmax."""
    hs = costing.hamsim_cost(L, _trotter_steps(cfg))
    model = costing.ReflectionModel(cfg.cost.reflection)
    refl = model.cost(L)
    refl_exp = model.cost(L, expected=True)
    init = costing.init_cost(cfg.init.type, L)
    rows = []
    for k in range(kmax + 1):
        c = costing.dbqite_cost(k, L, hs, refl, init)
        ce = costing.dbqite_cost(k, L, hs, refl_exp, init)
        rows.append(_cost_row("dbqite", L, k, c, ce.cz))
    for k in range(1, kmax + 1):
        rows.append(_cost_row("qpe", L, k, costing.qpe_cost(L, k, init=init)))
    return rows


def write_run(artifact: RunArtifact, cfg: ExperimentConfig, out_dir: str | Path) -> dict[str, Path]:
    """Write the trace CSV, JSON artifact and per-step cost CSV; return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = cfg.outputs.prefix
    return {
        "trace": write_trace_csv(artifact.rows, out / f"{prefix}_trace.csv"),
        "artifact": write_artifact_json(artifact, out / f"{prefix}.json"),
        "cost": write_cost_csv(artifact.costs, out / f"{prefix}_cost.csv"),
    }
