"""Three ways to obtain a triple (x0, alpha0, c) whose first sweep fails.

Each strategy returns an :class:`InitReport` recording the triple, the
evaluations it spent (the evaluation of f at the input point is not
counted) and the worst-case cost the matching analysis predicts.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .directions import DirectionSet
from .errors import ConfigurationError, EvaluationBudgetExceeded, InitializationBudgetError
from .objective import MeteredEvaluator
from .solver import _trial, check_initialization_assumption, poll

STRATEGIES = ("bootstrap", "stepsize", "forcing-constant")


@dataclass(frozen=True)
class InitReport:
    strategy: str
    x0: np.ndarray
    alpha0: float
    c: float
    f0: float
    evaluations_used: int
    theoretical_cost_bound: Optional[float]
    initialization_certified: bool
    certificate: tuple = ()
    certificate_evaluations: int = 0
    stepsize_ratio_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "x0": [float(v) for v in self.x0],
            "alpha0": float(self.alpha0),
            "c": float(self.c),
            "f0": float(self.f0),
            "evaluations_used": self.evaluations_used,
            "theoretical_cost_bound": self.theoretical_cost_bound,
            "initialization_certified": self.initialization_certified,
            "certificate_evaluations": self.certificate_evaluations,
            "stepsize_ratio_bound": self.stepsize_ratio_bound,
        }


@contextmanager
def _budget(evaluator: MeteredEvaluator, max_evaluations: Optional[int]):
    saved = evaluator.max_evaluations
    if max_evaluations is not None:
        evaluator.max_evaluations = evaluator.eval_count + max_evaluations
    try:
        yield
    except EvaluationBudgetExceeded as exc:
        raise InitializationBudgetError(
            f"initialization exceeded {max_evaluations} evaluations "
            "(objective unbounded below or budget too small)"
        ) from exc
    finally:
        evaluator.max_evaluations = saved


def _check_positive(**kw):
    for name, v in kw.items():
        if not (math.isfinite(v) and v > 0):
            raise ConfigurationError(f"{name} must be positive, got {v!r}")


def _f_star(evaluator, f_star):
    return evaluator.objective.f_star if f_star is None else f_star


def bootstrap_init(evaluator: MeteredEvaluator, x_tilde0, alpha0: float, c: float, D: DirectionSet,
                   *, policy: str = "first-improvement", max_evaluations: Optional[int] = None,
                   f_star: Optional[float] = None) -> InitReport:
    """Run fixed-stepsize polls from ``x_tilde0`` until the first failed sweep."""
    _check_positive(alpha0=alpha0, c=c)
    x = np.asarray(x_tilde0, dtype=np.float64).copy()
    f_tilde = evaluator.evaluate(x)
    fx = f_tilde
    used = 0
    with _budget(evaluator, max_evaluations):
        while True:
            outcome = poll(evaluator, (x, fx), alpha0, D, policy, c)
            used += outcome.evaluations_used
            if outcome.kind == "truncated":
                raise EvaluationBudgetExceeded("budget reached mid-sweep")
            if not outcome.success:
                break
            x, fx = outcome.new_point, outcome.new_value
    f_star = _f_star(evaluator, f_star)
    bound = None
    if f_star is not None:
        bound = D.size * ((f_tilde - f_star) / (c * alpha0**2) + 1.0)
    return InitReport(
        strategy="bootstrap",
        x0=x,
        alpha0=float(alpha0),
        c=float(c),
        f0=fx,
        evaluations_used=used,
        theoretical_cost_bound=bound,
        initialization_certified=True,
        certificate=outcome.trial_values,
    )


def stepsize_ratio_bound(f0: float, f_star: float, c: float, alpha_tilde0: float) -> float:
    """M = max(1, 2 sqrt((f(x0) - f*) / (c alpha~0^2)))."""
    gap = max(0.0, f0 - f_star)
    return max(1.0, 2.0 * math.sqrt(gap / (c * alpha_tilde0**2)))


def stepsize_init(evaluator: MeteredEvaluator, x0, alpha_tilde0: float, c: float, D: DirectionSet,
                  *, max_evaluations: Optional[int] = None, f_star: Optional[float] = None,
                  verify: Optional[bool] = None) -> InitReport:
    """Double the stepsize along each direction in turn until it stops decreasing f.

    For convex objectives the output satisfies the initialization assumption
    automatically; the per-direction failures are kept as the certificate.
    Otherwise (or when ``verify`` is true) the triple is checked explicitly at
    a further cost of |D| evaluations, reported separately.
    """
    _check_positive(alpha_tilde0=alpha_tilde0, c=c)
    x0 = np.asarray(x0, dtype=np.float64).copy()
    f0 = evaluator.evaluate(x0)
    alpha = float(alpha_tilde0)
    i = 0
    used = 0
    failures = []
    with _budget(evaluator, max_evaluations):
        while i < D.size:
            value = _trial(evaluator, x0 + alpha * D.matrix[i])
            used += 1
            if value <= f0 - c * alpha * alpha:
                alpha *= 2.0
            else:
                failures.append((i, alpha, value))
                i += 1

    convex = evaluator.objective.convexity_class in ("convex", "strongly-convex")
    if verify is None:
        verify = not convex
    extra = 0
    if verify:
        before = evaluator.eval_count
        certified = check_initialization_assumption(evaluator, x0, alpha, c, D, f0=f0)
        extra = evaluator.eval_count - before
    else:
        certified = True

    f_star = _f_star(evaluator, f_star)
    bound = M = None
    if f_star is not None:
        M = stepsize_ratio_bound(f0, f_star, c, alpha_tilde0)
        bound = D.size + math.log2(M)
    return InitReport(
        strategy="stepsize",
        x0=x0,
        alpha0=alpha,
        c=float(c),
        f0=f0,
        evaluations_used=used,
        theoretical_cost_bound=bound,
        initialization_certified=certified,
        certificate=tuple(failures),
        certificate_evaluations=extra,
        stepsize_ratio_bound=M,
    )


def forcing_constant_init(evaluator: MeteredEvaluator, x0, alpha0: float, D: DirectionSet) -> InitReport:
    """c = 1 + max(0, (f(x0) - min_d f(x0 + alpha0 d)) / alpha0^2), using |D| evaluations."""
    _check_positive(alpha0=alpha0)
    x0 = np.asarray(x0, dtype=np.float64).copy()
    f0 = evaluator.evaluate(x0)
    values = [_trial(evaluator, x0 + alpha0 * d) for d in D.matrix]
    finite = [v for v in values if math.isfinite(v)]
    lowest = min(finite) if finite else math.inf
    c = 1.0 + max(0.0, (f0 - lowest) / alpha0**2)
    return InitReport(
        strategy="forcing-constant",
        x0=x0,
        alpha0=float(alpha0),
        c=c,
        f0=f0,
        evaluations_used=len(values),
        theoretical_cost_bound=float(D.size),
        initialization_certified=True,
        certificate=tuple(values),
    )
