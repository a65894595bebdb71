import json

import pytest

from dbqite.config import ConfigError, ExperimentConfig


def base(**kw):
    d = {"schema_version": 1, "model": {"type": "heisenberg", "L": 4}, "init": "singlet",
         "engine": "dbqite", "steps": 1}
    d.update(kw)
    return d


def test_defaults():
    cfg = ExperimentConfig.from_dict({"schema_version": 1})
    assert cfg.engine == "dbqite" and cfg.steps == 2
    assert str(cfg.evo) == "trotter2(2)"
    assert cfg.schedule.kind == "grid" and cfg.schedule.alpha == 10.0 and cfg.schedule.points == 20


def test_round_trip():
    cfg = ExperimentConfig.from_dict(base(init={"type": "hva", "points": 11}, evo="exact",
                                          schedule={"kind": "fixed", "s": 0.1}))
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("patch, match", [
    ({"bogus": 1}, "unknown key"),
    ({"model": {"type": "heisenberg", "L": 4, "x": 1}}, "model: unknown key"),
    ({"schema_version": 2}, "schema_version"),
    ({"engine": "vqe"}, "engine"),
    ({"steps": -1}, "steps"),
    ({"steps": 1.5}, "steps"),
    ({"evo": "rk4"}, "evo"),
    ({"schedule": {"kind": "fixed"}}, "schedule"),
    ({"schedule": {"kind": "grid", "alpha": 0}}, "alpha"),
    ({"init": "spiral"}, "init.type"),
    ({"model": {"type": "heisenberg", "L": 5}}, "even number"),
    ({"model": {"type": "custom"}}, "model.file"),
    ({"qpe": {"rescale_factor": 0.5}}, "rescale_factor"),
    ({"cost": {"reflection": "magic"}}, "cost.reflection"),
    ({"seed": -3}, "seed"),
    ({"seed": 2**64}, "64 bits"),
])
def test_rejections(patch, match):
    d = base()
    if "schema_version" in patch:
        d["schema_version"] = patch["schema_version"]
    else:
        d.update(patch)
    with pytest.raises(ConfigError, match=match):
        ExperimentConfig.from_dict(d)


def test_missing_schema_version():
    with pytest.raises(ConfigError, match="schema_version"):
        ExperimentConfig.from_dict({"engine": "dbqite"})


def test_load_resolves_relative_paths(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps(base(model={"type": "custom", "file": "h.json"})))
    cfg = ExperimentConfig.load(tmp_path / "c.json")
    assert cfg.model.file == str(tmp_path / "h.json")


def test_load_invalid_json(tmp_path):
    (tmp_path / "c.json").write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        ExperimentConfig.load(tmp_path / "c.json")
