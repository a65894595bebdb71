"""Command-line entry point: ``dbqite run|verify|plot|cost|qpe``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from threadpoolctl import threadpool_limits

from dbqite.artifacts import TraceFormatError, write_cost_csv
from dbqite.config import ConfigError, CostConfig, ExperimentConfig, InitConfig, QpeConfig
from dbqite.flows import DegenerateGroundStateError
from dbqite.plotting import PLOT_KINDS, plot_traces
from dbqite.runner import cost_rows, run_experiment, write_run
from dbqite.verify import SUITES, load_hamiltonian, run_suite


def _sizes(text: str | None):
    if not text:
        return None
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid size list {text!r}") from None


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed: must fit in 64 bits")
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    if args.out:
        return Path(args.out)
    base = Path(args.config).parent if args.config else Path.cwd()
    return base / cfg.outputs.dir


def _report_run(cfg, args):
    artifact = run_experiment(cfg)
    paths = write_run(artifact, cfg, _out_dir(args, cfg))
    last = artifact.rows[-1]
    print(f"{cfg.engine}: L={artifact.info['num_qubits']} k={last.k} "
          f"E={last.E_k:.6f} F={last.F_k:.4f} ({artifact.wall_clock:.2f} s)")
    for kind, p in paths.items():
        print(f"wrote {kind}: {p}")
    return 0


def cmd_run(args) -> int:
    return _report_run(_load_config(args), args)


def cmd_qpe(args) -> int:
    cfg = _load_config(args)
    q = cfg.qpe
    q = QpeConfig.parse({
        "precision_qubits": args.precision_qubits or q.precision_qubits,
        "rescale_factor": args.rescale_factor or q.rescale_factor,
        "warm_start_steps": q.warm_start_steps if args.warm_start is None else args.warm_start,
    })
    return _report_run(replace(cfg, engine="qpe", qpe=q), args)


def cmd_cost(args) -> int:
    cfg = _load_config(args)
    if args.reflection or args.trotter_steps:
        cfg = replace(cfg, cost=CostConfig.parse({
            "reflection": args.reflection or cfg.cost.reflection,
            "trotter_steps": args.trotter_steps or cfg.cost.trotter_steps,
        }))
    if args.init:
        cfg = replace(cfg, init=InitConfig.parse(args.init))
    L = args.L or cfg.model.L
    if L is None:
        raise ConfigError("cost: give --L for custom models")
    rows = cost_rows(cfg, L, args.kmax)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    path = write_cost_csv(rows, out / f"{cfg.outputs.prefix}_cost.csv")
    for r in rows:
        print(f"{r['engine']:>6} k={r['k']} cz={r['cz']} u3={r['u3']} t={r['t']} depth={r['depth']}")
    print(f"wrote cost: {path}")
    return 0


def cmd_verify(args) -> int:
    H = None
    if args.hamiltonian:
        try:
            H = load_hamiltonian(args.hamiltonian)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"--hamiltonian: cannot read {args.hamiltonian} ({exc})") from exc
    seed = 1234 if args.seed is None else args.seed
    try:
        rep = run_suite(args.suite, seed, args.seeds, args.sizes, H)
    except DegenerateGroundStateError as exc:
        print(f"FAIL: {exc}")
        return 1
    print("\n".join(rep.lines()))
    return 0 if rep.passed else 1


def cmd_plot(args) -> int:
    out = Path(args.out) if args.out else Path(f"{args.kind}.svg")
    if out.suffix != ".svg":
        out.mkdir(parents=True, exist_ok=True)
        out = out / f"{args.kind}.svg"
    plot_traces(args.inputs, args.kind, out)
    print(f"wrote plot: {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="64-bit seed (overrides the config)")
    common.add_argument("--out", help="output directory (or SVG path for plot)")
    common.add_argument("--threads", type=int, default=None, help="BLAS thread limit")

    p = argparse.ArgumentParser(prog="dbqite", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", parents=[common], help="run a configured experiment")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("qpe", parents=[common], help="run the phase-estimation baseline")
    sp.add_argument("--precision-qubits", type=int)
    sp.add_argument("--rescale-factor", type=float)
    sp.add_argument("--warm-start", type=int, help="DB-QITE steps before phase estimation")
    sp.set_defaults(func=cmd_qpe)

    sp = sub.add_parser("cost", parents=[common], help="tabulate gate counts")
    sp.add_argument("--L", type=int)
    sp.add_argument("--kmax", type=int, default=3)
    sp.add_argument("--reflection")
    sp.add_argument("--trotter-steps", type=int)
    sp.add_argument("--init", choices=("singlet", "hva", "zero"))
    sp.set_defaults(func=cmd_cost)

    sp = sub.add_parser("verify", parents=[common], help="run seeded property suites")
    sp.add_argument("--suite", choices=SUITES, default="all")
    sp.add_argument("--seeds", type=int, default=20, help="instances per ensemble")
    sp.add_argument("--sizes", type=_sizes, help="comma-separated qubit counts")
    sp.add_argument("--hamiltonian", help="PauliSum JSON used by the fidelity suite")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("plot", parents=[common], help="draw SVG charts from trace CSVs")
    sp.add_argument("--kind", choices=PLOT_KINDS, default="fidelity")
    sp.add_argument("inputs", nargs="*", help="trace CSV files")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with threadpool_limits(limits=args.threads):
            return args.func(args)
    except (ConfigError, TraceFormatError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
