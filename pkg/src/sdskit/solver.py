"""Simplified direct search: poll loop, outer iterations and traces.

Outer iteration ``k`` halves the stepsize (more generally multiplies it by
``shrink_factor``), then chains successful polls

    f(x + alpha_k d) <= f(x) - c alpha_k^2

until a full sweep over ``D`` fails.  The point where that happens is the
outer iterate ``x_k``; the failed sweep is its certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .directions import DirectionSet, is_positive_spanning_set
from .errors import (
    ConfigurationError,
    EvaluationBudgetExceeded,
    ObjectivePathologyError,
)
from .objective import MeteredEvaluator, ObjectiveSpec

POLICIES = ("first-improvement", "best-improvement")
CAP_KINDS = ("convex", "strongly-convex")


@dataclass(frozen=True)
class EarlyStopCap:
    """Cap on successes per outer iteration.

    ``convex`` with value B ends iteration k once l_k reaches ceil(B / (c alpha_k));
    ``strongly-convex`` with value S once l_k reaches ceil(3 S / c).
    """

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in CAP_KINDS:
            raise ConfigurationError(f"early_stop_l_cap kind must be one of {CAP_KINDS}")
        if not self.value > 0:
            raise ConfigurationError("early_stop_l_cap value must be positive")

    def limit(self, c: float, alpha: float) -> int:
        if self.kind == "convex":
            return math.ceil(self.value / (c * alpha))
        return math.ceil(3.0 * self.value / c)


@dataclass(frozen=True)
class SolverConfig:
    x0: tuple
    alpha0: float
    c: float
    shrink_factor: float = 0.5
    poll_policy: str = "first-improvement"
    move_to_best_on_unsuccessful: bool = False
    max_iterations: Optional[int] = None
    min_stepsize: Optional[float] = None
    max_evaluations: Optional[int] = None
    target_gap: Optional[float] = None
    early_stop_l_cap: Optional[EarlyStopCap] = None
    record_grad_norm: bool = True
    require_spanning: bool = True

    def __post_init__(self):
        x0 = tuple(float(v) for v in np.asarray(self.x0, dtype=np.float64).ravel())
        object.__setattr__(self, "x0", x0)
        if not x0 or not all(math.isfinite(v) for v in x0):
            raise ConfigurationError("x0 must be a nonempty finite vector")
        if not (math.isfinite(self.alpha0) and self.alpha0 > 0):
            raise ConfigurationError("alpha0 must be positive")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ConfigurationError("c must be positive")
        if not 0 < self.shrink_factor < 1:
            raise ConfigurationError("shrink_factor must lie in (0, 1)")
        if self.poll_policy not in POLICIES:
            raise ConfigurationError(f"poll_policy must be one of {POLICIES}")
        if self.max_iterations is None and self.min_stepsize is None and self.max_evaluations is None:
            raise ConfigurationError(
                "set at least one of max_iterations, min_stepsize, max_evaluations"
            )
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ConfigurationError("max_iterations must be >= 0")
        if self.min_stepsize is not None and not self.min_stepsize > 0:
            raise ConfigurationError("min_stepsize must be positive")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ConfigurationError("max_evaluations must be >= 1")
        if self.target_gap is not None and not self.target_gap > 0:
            raise ConfigurationError("target_gap must be positive")

    def to_dict(self) -> dict:
        cap = self.early_stop_l_cap
        return {
            "x0": list(self.x0),
            "alpha0": float(self.alpha0),
            "c": float(self.c),
            "shrink_factor": float(self.shrink_factor),
            "poll_policy": self.poll_policy,
            "move_to_best_on_unsuccessful": self.move_to_best_on_unsuccessful,
            "max_iterations": self.max_iterations,
            "min_stepsize": self.min_stepsize,
            "max_evaluations": self.max_evaluations,
            "target_gap": self.target_gap,
            "early_stop_l_cap": None if cap is None else {"kind": cap.kind, "value": cap.value},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        d = dict(d)
        cap = d.pop("early_stop_l_cap", None)
        if cap is not None:
            d["early_stop_l_cap"] = EarlyStopCap(cap["kind"], float(cap["value"]))
        return cls(**d)


@dataclass(frozen=True)
class PollOutcome:
    """Result of one sweep over the direction set.

    ``kind`` is ``success``, ``unsuccessful`` or ``truncated`` (budget ran out
    mid-sweep).  ``trial_values`` holds f(x + alpha d) per evaluated direction
    (``nan`` for pathological values).
    """

    kind: str
    evaluations_used: int
    accepted_direction_index: Optional[int] = None
    new_point: Optional[np.ndarray] = None
    new_value: Optional[float] = None
    decreases_found: int = 0
    trial_values: tuple = ()

    @property
    def success(self) -> bool:
        return self.kind == "success"


@dataclass(frozen=True)
class OuterIterateRecord:
    k: int
    x: np.ndarray
    alpha: float
    l: int
    f: float
    evals: int
    grad_norm: Optional[float] = None
    status: str = "certified"  # certified | truncated | capped
    moved: bool = False
    x_certified: Optional[np.ndarray] = None
    f_certified: Optional[float] = None

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    @property
    def certificate_point(self) -> np.ndarray:
        """The point whose failed sweep certified this iterate."""
        return self.x_certified if self.moved else self.x

    def to_dict(self) -> dict:
        d = {
            "k": self.k,
            "x": [float(v) for v in self.x],
            "alpha": float(self.alpha),
            "l": self.l,
            "f": float(self.f),
            "evals": self.evals,
        }
        if self.grad_norm is not None:
            d["grad_norm"] = float(self.grad_norm)
        d["status"] = self.status
        if self.moved:
            d["moved"] = True
            d["x_certified"] = [float(v) for v in self.x_certified]
            d["f_certified"] = float(self.f_certified)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OuterIterateRecord":
        return cls(
            k=int(d["k"]),
            x=np.asarray(d["x"], dtype=np.float64),
            alpha=float(d["alpha"]),
            l=int(d["l"]),
            f=float(d["f"]),
            evals=int(d["evals"]),
            grad_norm=None if d.get("grad_norm") is None else float(d["grad_norm"]),
            status=d.get("status", "certified"),
            moved=bool(d.get("moved", False)),
            x_certified=None if "x_certified" not in d else np.asarray(d["x_certified"], dtype=np.float64),
            f_certified=None if "f_certified" not in d else float(d["f_certified"]),
        )


@dataclass(frozen=True)
class SolverTrace:
    config: SolverConfig
    directions: DirectionSet
    f0: float
    iterates: tuple
    total_evaluations: int
    termination_reason: str
    grad_norm0: Optional[float] = None
    pathological_evaluations: int = 0

    @property
    def complete(self) -> bool:
        return all(r.certified for r in self.iterates)

    def cumulative_evaluations(self) -> list[int]:
        """Observed N(k) for k = 0..K (index 0 is the evaluation of f(x0))."""
        out = [1]
        for r in self.iterates:
            out.append(out[-1] + r.evals)
        return out

    def to_dict(self) -> dict:
        d = {
            "config": self.config.to_dict(),
            "directions": self.directions.to_dict(),
            "f0": float(self.f0),
        }
        if self.grad_norm0 is not None:
            d["grad_norm0"] = float(self.grad_norm0)
        d["iterates"] = [r.to_dict() for r in self.iterates]
        d["total_evaluations"] = self.total_evaluations
        d["pathological_evaluations"] = self.pathological_evaluations
        d["termination_reason"] = self.termination_reason
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SolverTrace":
        return cls(
            config=SolverConfig.from_dict(d["config"]),
            directions=DirectionSet.from_dict(d["directions"]),
            f0=float(d["f0"]),
            iterates=tuple(OuterIterateRecord.from_dict(r) for r in d["iterates"]),
            total_evaluations=int(d["total_evaluations"]),
            termination_reason=d["termination_reason"],
            grad_norm0=None if d.get("grad_norm0") is None else float(d["grad_norm0"]),
            pathological_evaluations=int(d.get("pathological_evaluations", 0)),
        )


def _trial(evaluator, point):
    """Evaluate one poll point; a pathological value is returned as nan."""
    try:
        return evaluator.evaluate(point)
    except ObjectivePathologyError:
        return math.nan


def poll(evaluator: MeteredEvaluator, incumbent, alpha: float, D: DirectionSet,
         policy: str = "first-improvement", c: float = 1.0) -> PollOutcome:
    """One sweep of the sufficient-decrease test around ``incumbent = (x, f_x)``.

    ``f_x`` is taken as given and never re-evaluated.  The test is
    ``f(x + alpha d) <= f_x - c alpha^2``; a non-finite trial value fails it.
    """
    if not alpha > 0:
        raise ConfigurationError("alpha must be positive")
    if policy not in POLICIES:
        raise ConfigurationError(f"poll_policy must be one of {POLICIES}")
    x, fx = incumbent
    x = np.asarray(x, dtype=np.float64)
    threshold = fx - c * alpha * alpha
    values = []
    best_i = None
    decreases = 0
    for i, d in enumerate(D.matrix):
        try:
            value = _trial(evaluator, x + alpha * d)
        except EvaluationBudgetExceeded:
            return PollOutcome("truncated", len(values), decreases_found=decreases,
                               trial_values=tuple(values))
        values.append(value)
        if value <= threshold:
            decreases += 1
            if best_i is None or value < values[best_i]:
                best_i = i
            if policy == "first-improvement":
                break
    if best_i is None:
        return PollOutcome("unsuccessful", len(values), trial_values=tuple(values))
    return PollOutcome(
        "success",
        len(values),
        accepted_direction_index=best_i,
        new_point=x + alpha * D.matrix[best_i],
        new_value=values[best_i],
        decreases_found=decreases,
        trial_values=tuple(values),
    )


def _grad_norm(objective: ObjectiveSpec, x, enabled: bool):
    if not enabled or objective.gradient is None:
        return None
    return float(np.linalg.norm(objective.gradient(np.asarray(x, dtype=np.float64))))


def run_outer_iteration(evaluator: MeteredEvaluator, x_prev, f_prev: float, alpha_k: float,
                        D: DirectionSet, config: SolverConfig, k: int = 1) -> OuterIterateRecord:
    """Chain successful polls at stepsize ``alpha_k`` from ``x_prev``.

    ``alpha_k`` must already be shrunk by the caller.
    """
    x = np.asarray(x_prev, dtype=np.float64).copy()
    fx = float(f_prev)
    evals = 0
    successes = 0
    cap = config.early_stop_l_cap
    limit = cap.limit(config.c, alpha_k) if cap is not None else None
    status = "certified"
    moved = False
    x_cert = f_cert = None
    while True:
        if limit is not None and successes >= limit:
            status = "capped"
            break
        outcome = poll(evaluator, (x, fx), alpha_k, D, config.poll_policy, config.c)
        evals += outcome.evaluations_used
        if outcome.kind == "truncated":
            status = "truncated"
            break
        if outcome.success:
            x, fx = outcome.new_point, outcome.new_value
            successes += 1
            continue
        if config.move_to_best_on_unsuccessful:
            vals = np.asarray(outcome.trial_values)
            with np.errstate(invalid="ignore"):
                better = np.flatnonzero(vals < fx)
            if better.size:
                j = int(better[np.argmin(vals[better])])
                x_cert, f_cert = x, fx
                x, fx = x + alpha_k * D.matrix[j], float(vals[j])
                moved = True
        break
    return OuterIterateRecord(
        k=k,
        x=x,
        alpha=alpha_k,
        l=successes,
        f=fx,
        evals=evals,
        grad_norm=_grad_norm(evaluator.objective, x, config.record_grad_norm),
        status=status,
        moved=moved,
        x_certified=x_cert,
        f_certified=f_cert,
    )


def solve(objective: ObjectiveSpec, D: DirectionSet, config: SolverConfig,
          evaluator: Optional[MeteredEvaluator] = None) -> SolverTrace:
    """Run simplified direct search until a stop rule fires.

    Stop rules are checked in this order: iteration count (before starting
    iteration k > max_iterations), minimum stepsize (alpha_k < min_stepsize),
    evaluation budget (exhausted before or during an iteration) and, after a
    completed iteration, ``target_gap`` when ``objective.f_star`` is known.
    """
    if D.dimension != objective.dimension:
        raise ConfigurationError(
            f"direction set has dimension {D.dimension}, objective has {objective.dimension}"
        )
    if len(config.x0) != objective.dimension:
        raise ConfigurationError("x0 length does not match the objective dimension")
    if config.require_spanning and not is_positive_spanning_set(D):
        raise ConfigurationError("direction set is not a positive spanning set")
    if evaluator is None:
        evaluator = MeteredEvaluator(objective)
    start = evaluator.eval_count
    start_pathologies = len(evaluator.pathologies)
    evaluator.max_evaluations = (
        None if config.max_evaluations is None else start + config.max_evaluations
    )
    x = np.asarray(config.x0, dtype=np.float64)
    try:
        fx = evaluator.evaluate(x)
    except ObjectivePathologyError as exc:
        raise ConfigurationError(f"f(x0) is not finite: {exc.value!r}") from None
    f0 = fx

    records = []
    alpha = float(config.alpha0)
    k = 0
    reason = None
    while reason is None:
        k += 1
        if config.max_iterations is not None and k > config.max_iterations:
            reason = "max_iterations"
            break
        alpha = alpha * config.shrink_factor
        if config.min_stepsize is not None and alpha < config.min_stepsize:
            reason = "min_stepsize"
            break
        if evaluator.remaining() is not None and evaluator.remaining() <= 0:
            reason = "eval_budget"
            break
        rec = run_outer_iteration(evaluator, x, fx, alpha, D, config, k)
        records.append(rec)
        x, fx = rec.x, rec.f
        if rec.status == "truncated":
            reason = "eval_budget"
        elif (config.target_gap is not None and objective.f_star is not None
              and fx - objective.f_star <= config.target_gap):
            reason = "target_gap"

    return SolverTrace(
        config=config,
        directions=D,
        f0=f0,
        iterates=tuple(records),
        total_evaluations=evaluator.eval_count - start,
        termination_reason=reason,
        grad_norm0=_grad_norm(objective, config.x0, config.record_grad_norm),
        pathological_evaluations=len(evaluator.pathologies) - start_pathologies,
    )


def check_initialization_assumption(evaluator: MeteredEvaluator, x0, alpha0: float, c: float,
                                    D: DirectionSet, f0: Optional[float] = None) -> bool:
    """True iff ``f(x0 + alpha0 d) > f(x0) - c alpha0^2`` for every d in D.

    Always spends |D| evaluations (plus one for f(x0) when ``f0`` is not
    given).  A non-finite trial value is not a decrease, so it passes.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if f0 is None:
        f0 = evaluator.evaluate(x0)
    threshold = f0 - c * alpha0 * alpha0
    ok = True
    for d in D.matrix:
        value = _trial(evaluator, x0 + alpha0 * d)
        if value <= threshold:
            ok = False
    return ok
