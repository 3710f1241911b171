"""Experiment configuration: schema validation, defaults and object builders."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
from referencing import Registry, Resource

from .directions import DirectionSet, build_direction_set, load_direction_set, maximal_positive_basis
from .errors import ConfigurationError, SDSError
from .objective import ObjectiveSpec, level_set_radius_quadratic, make_objective
from .solver import SolverConfig

SOLVER_DEFAULTS = {
    "shrink_factor": 0.5,
    "poll_policy": "first-improvement",
    "move_to_best_on_unsuccessful": False,
    "max_iterations": None,
    "min_stepsize": None,
    "max_evaluations": None,
    "target_gap": None,
    "early_stop_l_cap": None,
    "record_grad_norm": True,
}
ANALYSIS_DEFAULTS = {"epsilons": [], "certify_initialization": True, "rel_tol": 1e-9, "sampled_mu_samples": 0}
OUTPUT_DEFAULTS = {"dir": "out", "format": "both", "stem": "trace"}

# parameters each init strategy reads from the "init" block
INIT_NEEDS = {
    "none": (),
    "bootstrap": ("alpha0", "c"),
    "stepsize": ("alpha_tilde0", "c"),
    "forcing-constant": ("alpha0",),
}


def load_schema(name: str = "config") -> dict:
    text = resources.files("sdskit").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _field_path(err) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


SCHEMAS = ("config", "direction_set", "trace", "report")


def _registry() -> Registry:
    resources_ = []
    for name in SCHEMAS:
        doc = load_schema(name)
        resources_.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources_)


def validate_document(doc: dict, schema: str = "config") -> None:
    """Raise ConfigurationError naming the first offending field."""
    validator = jsonschema.Draft202012Validator(load_schema(schema), registry=_registry())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigurationError(f"{_field_path(err)}: {err.message}")


@dataclass(frozen=True)
class ExperimentConfig:
    objective: dict
    solver: dict
    name: str = "experiment"
    seed: int = 0
    directions: object = "maximal-positive-basis"
    init: dict = field(default_factory=lambda: {"strategy": "none"})
    analysis: dict = field(default_factory=lambda: dict(ANALYSIS_DEFAULTS))
    output: dict = field(default_factory=lambda: dict(OUTPUT_DEFAULTS))
    base_dir: Optional[str] = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, doc: dict, base_dir=None) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigurationError("<root>: configuration must be a JSON object")
        validate_document(doc)
        doc = copy.deepcopy(doc)
        init = {"strategy": "none", **doc.get("init", {})}
        strategy = init["strategy"]
        for key in INIT_NEEDS[strategy]:
            if key not in init:
                raise ConfigurationError(f"init.{key}: required by strategy {strategy!r}")
        solver = {**SOLVER_DEFAULTS, **doc["solver"]}
        if strategy == "none":
            for key in ("alpha0", "c"):
                if key not in solver:
                    raise ConfigurationError(f"solver.{key}: required when init.strategy is 'none'")
        cfg = cls(
            objective={"params": {}, **doc["objective"]},
            solver=solver,
            name=doc.get("name", "experiment"),
            seed=doc.get("seed", 0),
            directions=doc.get("directions", "maximal-positive-basis"),
            init=init,
            analysis={**ANALYSIS_DEFAULTS, **doc.get("analysis", {})},
            output={**OUTPUT_DEFAULTS, **doc.get("output", {})},
            base_dir=None if base_dir is None else str(base_dir),
        )
        cfg._check_consistency()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        return cls.from_dict(doc, base_dir=path.parent)

    def to_dict(self) -> dict:
        return copy.deepcopy({
            "name": self.name,
            "seed": self.seed,
            "objective": self.objective,
            "directions": self.directions,
            "init": self.init,
            "solver": self.solver,
            "analysis": self.analysis,
            "output": self.output,
        })

    def _check_consistency(self):
        obj = self.build_objective()
        if len(self.solver["x0"]) != obj.dimension:
            raise ConfigurationError(
                f"solver.x0: has length {len(self.solver['x0'])}, objective dimension is {obj.dimension}"
            )
        if self.objective.get("x_star") is not None and len(self.objective["x_star"]) != obj.dimension:
            raise ConfigurationError("objective.x_star: wrong length")
        solver = {k: v for k, v in self.solver.items() if k not in ("alpha0", "c")}
        try:
            SolverConfig.from_dict({**solver, "alpha0": 1.0, "c": 1.0})
        except (ConfigurationError, TypeError) as exc:
            raise ConfigurationError(f"solver: {exc}") from None

    # -- builders ---------------------------------------------------------------

    @property
    def strategy(self) -> str:
        return self.init["strategy"]

    def build_objective(self) -> ObjectiveSpec:
        """Catalog objective with any metadata overrides from the config applied."""
        try:
            obj = make_objective(self.objective["name"], **self.objective.get("params", {}))
        except SDSError as exc:
            raise ConfigurationError(f"objective.params: {exc}") from None
        overrides = {}
        for key, attr in (("L", "smoothness_L"), ("f_star", "f_star"), ("x_star", "x_star")):
            if key in self.objective:
                overrides[attr] = self.objective[key]
        if "lambda" in self.objective:
            overrides["strong_convexity_lambda"] = self.objective["lambda"]
        if not overrides:
            return obj
        fields = {name: getattr(obj, name) for name in obj.__dataclass_fields__}
        fields.update(overrides)
        if "x_star" in overrides:
            fields["x_star"] = np.asarray(overrides["x_star"], dtype=np.float64)
        try:
            return ObjectiveSpec(**fields)
        except SDSError as exc:
            raise ConfigurationError(f"objective: {exc}") from None

    def build_directions(self) -> DirectionSet:
        choice = self.directions
        try:
            if choice == "maximal-positive-basis":
                return maximal_positive_basis(len(self.solver["x0"]))
            if "vectors" in choice:
                return build_direction_set(choice["vectors"])
            path = Path(choice["file"])
            if not path.is_absolute() and self.base_dir is not None:
                path = Path(self.base_dir) / path
            return load_direction_set(path)
        except OSError as exc:
            raise ConfigurationError(f"directions.file: {exc}") from None
        except (SDSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"directions: {exc}") from None

    def solver_config(self, alpha0: float, c: float, x0=None) -> SolverConfig:
        d = dict(self.solver)
        d.update(alpha0=float(alpha0), c=float(c))
        if x0 is not None:
            d["x0"] = [float(v) for v in x0]
        return SolverConfig.from_dict(d)

    def regime(self, objective: ObjectiveSpec) -> str:
        return self.analysis.get("regime", objective.convexity_class)

    def R0(self, objective: ObjectiveSpec, x0) -> Optional[float]:
        """Level-set radius: explicit override, else analytic for quadratics."""
        if "R0" in self.objective:
            return float(self.objective["R0"])
        name = self.objective["name"]
        params = self.objective.get("params", {})
        if name == "sphere":
            return level_set_radius_quadratic(np.full(objective.dimension, 2.0), x0)
        if name == "quadratic":
            return level_set_radius_quadratic(params["d"], x0)
        return None
