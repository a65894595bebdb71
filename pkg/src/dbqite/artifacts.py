"""CSV and JSON persistence for traces, cost tables and run artifacts."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

TRACE_HEADER = ("engine", "k", "s_k", "t_H", "t_omega", "E_k", "V_k", "F_k", "cz", "u3", "t", "depth")
COST_HEADER = ("engine", "L", "k", "cz", "u3", "t", "depth", "ancillas", "cz_expected")

_FLOAT_COLS = {"s_k", "t_H", "t_omega", "E_k", "V_k", "F_k"}
_INT_COLS = {"k", "cz", "u3", "t", "depth", "L", "ancillas", "cz_expected"}


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TraceRow:
    engine: str
    k: int
    s_k: float
    t_H: float
    t_omega: float
    E_k: float
    V_k: float
    F_k: float
    cz: int = 0
    u3: int = 0
    t: int = 0
    depth: int = 0


def _fmt(v) -> str:
    # repr round-trips doubles exactly
    return repr(float(v)) if isinstance(v, float) else str(v)


def trace_csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, name)) for name in TRACE_HEADER])
    return buf.getvalue()


def write_trace_csv(rows, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(trace_csv_text(rows))
    return path


def _parse_cell(name: str, raw: str, row_no: int):
    try:
        if name in _INT_COLS:
            return int(raw)
        if name in _FLOAT_COLS:
            return float(raw)
    except ValueError:
        raise TraceFormatError(f"row {row_no}, column {name!r}: cannot parse {raw!r}") from None
    if not raw:
        raise TraceFormatError(f"row {row_no}, column {name!r}: empty value")
    return raw


def read_trace_csv(path: str | Path) -> list[TraceRow]:
    """Parse a trace CSV; errors name the offending row (1 = first data row) and column."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file") from None
        if tuple(header) != TRACE_HEADER:
            raise TraceFormatError(f"{path}: header {header} does not match {list(TRACE_HEADER)}")
        rows = []
        for i, raw in enumerate(reader, start=1):
            if len(raw) != len(TRACE_HEADER):
                raise TraceFormatError(
                    f"{path}: row {i} has {len(raw)} columns, expected {len(TRACE_HEADER)}")
            vals = {name: _parse_cell(name, cell, i) for name, cell in zip(TRACE_HEADER, raw)}
            rows.append(TraceRow(**vals))
    return rows


def write_cost_csv(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COST_HEADER)
    for r in rows:
        w.writerow([_fmt(r[name]) for name in COST_HEADER])
    path.write_text(buf.getvalue())
    return path


def read_cost_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COST_HEADER:
            raise TraceFormatError(f"{path}: unexpected cost header {reader.fieldnames}")
        return [{k: (v if k == "engine" else int(v)) for k, v in r.items()} for r in reader]


@dataclass
class RunArtifact:
    config: dict
    rows: list[TraceRow]
    seed: int
    version: str
    wall_clock: float
    qpe: list[dict] = field(default_factory=list)
    costs: list[dict] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rows"] = [asdict(r) for r in self.rows]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunArtifact:
        names = {f.name for f in fields(cls)}
        extra = set(d) - names
        if extra:
            raise ValueError(f"unknown artifact fields {sorted(extra)}")
        d = dict(d)
        d["rows"] = [TraceRow(**r) for r in d["rows"]]
        return cls(**d)


def write_artifact_json(artifact: RunArtifact, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(artifact.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def read_artifact_json(path: str | Path) -> RunArtifact:
    return RunArtifact.from_dict(json.loads(Path(path).read_text()))
