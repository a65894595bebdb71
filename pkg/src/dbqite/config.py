"""Experiment configuration: JSON schema, validation and defaults.

Unknown keys are rejected at every level and everything is validated before
any computation starts.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from dbqite.costing import REFLECTION_KINDS
from dbqite.flows import SCHEDULE_KINDS, Schedule
from dbqite.hamiltonian import Evolution

SCHEMA_VERSION = 1
ENGINES = ("ite", "dbi", "dbqite", "qpe")
MODEL_TYPES = ("heisenberg", "custom", "random")
INIT_TYPES = ("singlet", "hva", "zero", "file")


class ConfigError(ValueError):
    pass


def _check_keys(section: str, data: dict, allowed: set[str]):
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected an object, got {type(data).__name__}")
    extra = sorted(set(data) - allowed)
    if extra:
        raise ConfigError(f"{section}: unknown key(s) {', '.join(extra)}")


def _int(section, value, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{section}: must be >= {minimum}, got {value}")
    return value


def _num(section, value, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}: expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{section}: must be positive, got {value}")
    return float(value)


@dataclass(frozen=True)
class ModelConfig:
    type: str = "heisenberg"
    L: int | None = 10
    file: str | None = None

    @classmethod
    def parse(cls, data) -> ModelConfig:
        _check_keys("model", data, {"type", "L", "file"})
        kind = data.get("type", "heisenberg")
        if kind not in MODEL_TYPES:
            raise ConfigError(f"model.type: expected one of {MODEL_TYPES}, got {kind!r}")
        if kind == "custom":
            if not isinstance(data.get("file"), str):
                raise ConfigError("model.file: required for custom models")
            if "L" in data:
                raise ConfigError("model.L: not allowed for custom models (read from file)")
            return cls(kind, None, data["file"])
        if "file" in data:
            raise ConfigError(f"model.file: not allowed for {kind} models")
        return cls(kind, _int("model.L", data.get("L", 10), 2), None)


@dataclass(frozen=True)
class InitConfig:
    type: str = "singlet"
    points: int = 41
    file: str | None = None

    @classmethod
    def parse(cls, data) -> InitConfig:
        if isinstance(data, str):
            data = {"type": data}
        _check_keys("init", data, {"type", "points", "file"})
        kind = data.get("type", "singlet")
        if kind not in INIT_TYPES:
            raise ConfigError(f"init.type: expected one of {INIT_TYPES}, got {kind!r}")
        if kind == "file" and not isinstance(data.get("file"), str):
            raise ConfigError("init.file: required for file initialization")
        if kind != "file" and "file" in data:
            raise ConfigError("init.file: only allowed with type 'file'")
        if kind != "hva" and "points" in data:
            raise ConfigError("init.points: only allowed with type 'hva'")
        return cls(kind, _int("init.points", data.get("points", 41), 1), data.get("file"))


@dataclass(frozen=True)
class IteConfig:
    tau_max: float = 2.0

    @classmethod
    def parse(cls, data) -> IteConfig:
        _check_keys("ite", data, {"tau_max"})
        return cls(_num("ite.tau_max", data.get("tau_max", 2.0), positive=True))


@dataclass(frozen=True)
class QpeConfig:
    precision_qubits: int = 3
    rescale_factor: float = 1.0
    warm_start_steps: int = 0

    @classmethod
    def parse(cls, data) -> QpeConfig:
        _check_keys("qpe", data, {"precision_qubits", "rescale_factor", "warm_start_steps"})
        kappa = _num("qpe.rescale_factor", data.get("rescale_factor", 1.0), positive=True)
        if kappa < 1.0:
            raise ConfigError("qpe.rescale_factor: must be >= 1 (an overestimate of the width)")
        return cls(
            _int("qpe.precision_qubits", data.get("precision_qubits", 3), 1),
            kappa,
            _int("qpe.warm_start_steps", data.get("warm_start_steps", 0), 0),
        )


@dataclass(frozen=True)
class CostConfig:
    reflection: str = "cca"
    trotter_steps: int = 2

    @classmethod
    def parse(cls, data) -> CostConfig:
        _check_keys("cost", data, {"reflection", "trotter_steps"})
        refl = data.get("reflection", "cca")
        if refl not in REFLECTION_KINDS:
            raise ConfigError(f"cost.reflection: expected one of {REFLECTION_KINDS}, got {refl!r}")
        return cls(refl, _int("cost.trotter_steps", data.get("trotter_steps", 2), 1))


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    prefix: str = "run"

    @classmethod
    def parse(cls, data) -> OutputConfig:
        _check_keys("outputs", data, {"dir", "prefix"})
        d, p = data.get("dir", "out"), data.get("prefix", "run")
        if not isinstance(d, str) or not isinstance(p, str) or not p:
            raise ConfigError("outputs.dir and outputs.prefix must be non-empty strings")
        return cls(d, p)


def _parse_schedule(data) -> Schedule:
    _check_keys("schedule", data, {"kind", "s", "points", "s_max", "s_min_ratio", "alpha", "beta"})
    kind = data.get("kind", "grid")
    if kind not in SCHEDULE_KINDS:
        raise ConfigError(f"schedule.kind: expected one of {SCHEDULE_KINDS}, got {kind!r}")
    default_alpha = 10.0 if kind == "grid" else 1.0
    try:
        return Schedule(
            kind=kind,
            s=None if data.get("s") is None else _num("schedule.s", data["s"]),
            points=_int("schedule.points", data.get("points", 20), 1),
            s_max=None if data.get("s_max") is None else _num("schedule.s_max", data["s_max"], True),
            s_min_ratio=_num("schedule.s_min_ratio", data.get("s_min_ratio", 1.0 / 400.0), True),
            alpha=_num("schedule.alpha", data.get("alpha", default_alpha), True),
            beta=_num("schedule.beta", data.get("beta", 1.0), True),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"schedule: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    init: InitConfig = field(default_factory=InitConfig)
    engine: str = "dbqite"
    steps: int = 2
    schedule: Schedule = field(default_factory=Schedule.grid)
    evo: Evolution = field(default_factory=lambda: Evolution("trotter2", 2))
    seed: int = 0
    ite: IteConfig = field(default_factory=IteConfig)
    qpe: QpeConfig = field(default_factory=QpeConfig)
    cost: CostConfig = field(default_factory=CostConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path | None = None) -> ExperimentConfig:
        """Validate a config mapping; relative file paths resolve against ``base_dir``."""
        allowed = {"schema_version", "model", "init", "engine", "steps", "schedule", "evo",
                   "seed", "ite", "qpe", "cost", "outputs"}
        _check_keys("config", data, allowed)
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
        engine = data.get("engine", "dbqite")
        if engine not in ENGINES:
            raise ConfigError(f"engine: expected one of {ENGINES}, got {engine!r}")
        try:
            evo = Evolution.parse(data.get("evo", "trotter2(2)"))
        except ValueError as exc:
            raise ConfigError(f"evo: {exc}") from exc
        seed = _int("seed", data.get("seed", 0), 0)
        if seed >= 2**64:
            raise ConfigError("seed: must fit in 64 bits")
        model = ModelConfig.parse(data.get("model", {}))
        init = InitConfig.parse(data.get("init", {}))
        if base_dir is not None:
            base = Path(base_dir)
            if model.file is not None and not Path(model.file).is_absolute():
                model = ModelConfig(model.type, model.L, str(base / model.file))
            if init.file is not None and not Path(init.file).is_absolute():
                init = InitConfig(init.type, init.points, str(base / init.file))
        if init.type in ("singlet", "hva") and model.L is not None and model.L % 2:
            raise ConfigError(f"init.type: {init.type} needs an even number of qubits")
        return cls(
            model=model,
            init=init,
            engine=engine,
            steps=_int("steps", data.get("steps", 2), 0),
            schedule=_parse_schedule(data.get("schedule", {})),
            evo=evo,
            seed=seed,
            ite=IteConfig.parse(data.get("ite", {})),
            qpe=QpeConfig.parse(data.get("qpe", {})),
            cost=CostConfig.parse(data.get("cost", {})),
            outputs=OutputConfig.parse(data.get("outputs", {})),
        )

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "model": {k: v for k, v in asdict(self.model).items() if v is not None},
            "init": {"type": self.init.type},
            "engine": self.engine,
            "steps": self.steps,
            "schedule": self.schedule.to_dict(),
            "evo": str(self.evo),
            "seed": self.seed,
            "ite": asdict(self.ite),
            "qpe": asdict(self.qpe),
            "cost": asdict(self.cost),
            "outputs": asdict(self.outputs),
        }
        if self.init.type == "hva":
            out["init"]["points"] = self.init.points
        if self.init.type == "file":
            out["init"]["file"] = self.init.file
        return out
