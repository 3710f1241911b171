import json

import pytest

from conftest import CONFIGS, ROOT
from sdskit.config import SCHEMAS, ExperimentConfig, load_schema, validate_document
from sdskit.errors import ConfigurationError


def base_doc(**kw):
    doc = {
        "objective": {"name": "sphere", "params": {"n": 2}},
        "solver": {"x0": [1.0, -1.0], "alpha0": 1.0, "c": 0.5, "max_iterations": 5},
    }
    doc.update(kw)
    return doc


def test_round_trip_every_example_config():
    for path in sorted(CONFIGS.glob("*.json")):
        doc = json.loads(path.read_text())
        if "objective" not in doc:
            continue
        cfg = ExperimentConfig.load(path)
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg and again.to_dict() == cfg.to_dict()


def test_defaults_are_filled():
    cfg = ExperimentConfig.from_dict(base_doc())
    d = cfg.to_dict()
    assert d["init"] == {"strategy": "none"}
    assert d["solver"]["shrink_factor"] == 0.5 and d["output"]["format"] == "both"
    assert cfg.regime(cfg.build_objective()) == "strongly-convex"
    assert cfg.build_directions().size == 4


@pytest.mark.parametrize(
    "change, field",
    [
        (lambda d: d["solver"].update(alpha0=-1), "solver.alpha0"),
        (lambda d: d["solver"].pop("c"), "solver.c"),
        (lambda d: d["solver"].update(x0=[1.0]), "solver.x0"),
        (lambda d: d["objective"].update(name="banana"), "objective.name"),
        (lambda d: d.update(init={"strategy": "stepsize", "c": 1.0}), "init.alpha_tilde0"),
        (lambda d: d.update(colour="red"), "<root>"),
        (lambda d: d["solver"].update(max_iterations=None), "solver"),
        (lambda d: d.update(directions={"vectors": [[1.0, 0.0], [0.0]]}), None),
    ],
)
def test_field_level_errors(change, field):
    doc = base_doc()
    change(doc)
    cfg_err = None
    try:
        cfg = ExperimentConfig.from_dict(doc)
        cfg.build_directions()
    except ConfigurationError as exc:
        cfg_err = str(exc)
    assert cfg_err is not None
    if field:
        assert cfg_err.startswith(field), cfg_err


def test_overrides_and_R0():
    cfg = ExperimentConfig.from_dict(base_doc(objective={"name": "rosenbrock", "L": 2500.0}))
    assert cfg.build_objective().smoothness_L == 2500.0
    cfg = ExperimentConfig.from_dict(base_doc())
    assert cfg.R0(cfg.build_objective(), [3.0, 4.0]) == pytest.approx(5.0)
    q = base_doc(objective={"name": "quadratic", "params": {"d": [1.0, 4.0]}})
    cfg = ExperimentConfig.from_dict(q)
    assert cfg.R0(cfg.build_objective(), [0.0, 1.0]) == pytest.approx(2.0)
    cfg = ExperimentConfig.from_dict(base_doc(objective={"name": "logsumexp", "params": {"n": 2}, "R0": 3.0}))
    assert cfg.R0(cfg.build_objective(), [0.0, 1.0]) == 3.0


def test_load_errors(tmp_path):
    with pytest.raises(ConfigurationError, match="cannot read"):
        ExperimentConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError, match="invalid JSON"):
        ExperimentConfig.load(bad)


def test_directions_file_relative_to_config(tmp_path):
    (tmp_path / "d.json").write_text(json.dumps({"dimension": 2, "directions": [[1, 0], [0, 1], [-1, -1]]}))
    path = tmp_path / "c.json"
    path.write_text(json.dumps(base_doc(directions={"file": "d.json"})))
    assert ExperimentConfig.load(path).build_directions().size == 3


def test_shipped_schemas_match_docs():
    for name in SCHEMAS:
        doc_copy = json.loads((ROOT / "docs" / "schemas" / f"{name}.schema.json").read_text())
        assert doc_copy == load_schema(name)


def test_fixture_validates_against_trace_schema():
    validate_document(json.loads((ROOT / "tests" / "fixtures" / "sphere1d_trace.json").read_text()), "trace")
    validate_document(json.loads((CONFIGS / "minimal_basis_r2.json").read_text()), "direction_set")
