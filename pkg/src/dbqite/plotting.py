"""Static SVG charts from trace CSVs."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from dbqite.artifacts import read_trace_csv  # noqa: E402

PLOT_KINDS = ("energy", "fidelity", "gates-vs-fidelity")


def _series(paths):
    """One (label, rows) pair per engine per input file."""
    out = []
    for p in paths:
        groups = defaultdict(list)
        for r in read_trace_csv(p):
            groups[r.engine].append(r)
        for engine, rows in groups.items():
            label = f"{Path(p).stem}:{engine}" if len(paths) > 1 else engine
            out.append((label, rows))
    return out


def plot_traces(paths, kind: str, out_path: str | Path):
    """Draw one line per engine and input file and save it as SVG.

    ``energy`` and ``fidelity`` plot E_k or F_k against k. ``gates-vs-fidelity``
    plots F_k against the CZ count on a log axis; rows without gates are skipped.
    Returns the matplotlib Figure.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("no input CSV files given")
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    series = _series(paths)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, rows in series:
        if kind == "energy":
            ax.plot([r.k for r in rows], [r.E_k for r in rows], marker="o", label=label)
        elif kind == "fidelity":
            ax.plot([r.k for r in rows], [r.F_k for r in rows], marker="o", label=label)
        else:
            pts = [(r.cz, r.F_k) for r in rows if r.cz > 0]
            if pts:
                ax.plot(*zip(*pts), marker="o", label=label)
    if kind == "gates-vs-fidelity":
        ax.set_xscale("log")
        ax.set_xlabel("CZ gates")
        ax.set_ylabel("ground-state fidelity")
    else:
        ax.set_xlabel("k")
        ax.set_ylabel("energy" if kind == "energy" else "ground-state fidelity")
    ax.legend()
    fig.tight_layout()
    fig.savefig(Path(out_path), format="svg")
    plt.close(fig)
    return fig
