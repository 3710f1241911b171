"""Objectives with ground-truth metadata and a metered evaluator.

Every call to :meth:`MeteredEvaluator.evaluate` costs exactly one function
evaluation; that count is the unit of cost for the solver and for all
complexity bounds.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    EvaluationBudgetExceeded,
    ObjectivePathologyError,
    ShapeError,
    UnknownObjectiveError,
)

CONVEXITY_CLASSES = ("nonconvex", "convex", "strongly-convex")


@dataclass(frozen=True)
class ObjectiveSpec:
    """An evaluatable objective and whatever is known about it.

    ``evaluate`` must be a pure function of ``x``.  Optional metadata is used
    only by the analysis layer, never by the solver.
    """

    name: str
    dimension: int
    evaluate: Callable[[np.ndarray], float]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    smoothness_L: Optional[float] = None
    strong_convexity_lambda: float = 0.0
    f_star: Optional[float] = None
    x_star: Optional[np.ndarray] = None
    convexity_class: str = "nonconvex"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError("dimension must be >= 1")
        if self.convexity_class not in CONVEXITY_CLASSES:
            raise ConfigurationError(f"unknown convexity class {self.convexity_class!r}")
        if self.smoothness_L is not None and not self.smoothness_L > 0:
            raise ConfigurationError("smoothness_L must be positive")
        lam = self.strong_convexity_lambda
        if lam < 0:
            raise ConfigurationError("strong_convexity_lambda must be >= 0")
        if lam > 0:
            if self.convexity_class != "strongly-convex":
                raise ConfigurationError("positive lambda requires convexity_class 'strongly-convex'")
            if self.smoothness_L is not None and lam > self.smoothness_L:
                raise ConfigurationError("strong convexity constant exceeds L")
        elif self.convexity_class == "strongly-convex":
            raise ConfigurationError("strongly-convex objectives need lambda > 0")
        if self.x_star is not None:
            xs = np.asarray(self.x_star, dtype=np.float64)
            if xs.shape != (self.dimension,):
                raise ShapeError("x_star has the wrong shape")
            object.__setattr__(self, "x_star", xs)
            if self.gradient is not None:
                g = float(np.linalg.norm(self.gradient(xs)))
                if not g < 1e-8:
                    raise ConfigurationError(f"gradient at x_star has norm {g:g}")

    def __call__(self, x) -> float:
        return float(self.evaluate(np.asarray(x, dtype=np.float64)))


class MeteredEvaluator:
    """Counts every evaluation of an objective and tracks the best point seen.

    Parameters
    ----------
    objective : ObjectiveSpec
    max_evaluations : int, optional
        Hard cap; the evaluation that would exceed it raises
        :class:`EvaluationBudgetExceeded` without being counted.
    """

    def __init__(self, objective: ObjectiveSpec, max_evaluations: Optional[int] = None):
        self.objective = objective
        self.max_evaluations = max_evaluations
        self.eval_count = 0
        self.best_point: Optional[np.ndarray] = None
        self.best_value = math.inf
        self.pathologies: list[tuple[np.ndarray, float]] = []
        self._lock = threading.Lock()

    @property
    def best_seen(self):
        return self.best_point, self.best_value

    def remaining(self) -> Optional[int]:
        if self.max_evaluations is None:
            return None
        return self.max_evaluations - self.eval_count

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.objective.dimension,):
            raise ShapeError(f"expected a point of length {self.objective.dimension}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DomainError("evaluation point has non-finite components")
        with self._lock:
            if self.max_evaluations is not None and self.eval_count >= self.max_evaluations:
                raise EvaluationBudgetExceeded(f"budget of {self.max_evaluations} evaluations reached")
            self.eval_count += 1
        value = float(self.objective.evaluate(x))
        with self._lock:
            if not math.isfinite(value):
                self.pathologies.append((x.copy(), value))
                raise ObjectivePathologyError(x.copy(), value)
            if value < self.best_value:
                self.best_value = value
                self.best_point = x.copy()
        return value

    __call__ = evaluate


# -- catalog -----------------------------------------------------------------


def sphere(n: int) -> ObjectiveSpec:
    """f(x) = |x|^2."""
    n = _dim(n)
    return ObjectiveSpec(
        name="sphere",
        dimension=n,
        evaluate=lambda x: float(x @ x),
        gradient=lambda x: 2.0 * x,
        smoothness_L=2.0,
        strong_convexity_lambda=2.0,
        f_star=0.0,
        x_star=np.zeros(n),
        convexity_class="strongly-convex",
        params={"n": n},
    )


def diagonal_quadratic(d) -> ObjectiveSpec:
    """f(x) = 0.5 * x^T diag(d) x with every d_i > 0."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 1 or d.size == 0:
        raise ShapeError("d must be a nonempty vector")
    if not np.all(d > 0):
        raise DomainError("all curvatures d_i must be positive")
    d = d.copy()
    return ObjectiveSpec(
        name="quadratic",
        dimension=d.size,
        evaluate=lambda x: 0.5 * float(x @ (d * x)),
        gradient=lambda x: d * x,
        smoothness_L=float(d.max()),
        strong_convexity_lambda=float(d.min()),
        f_star=0.0,
        x_star=np.zeros(d.size),
        convexity_class="strongly-convex",
        params={"d": d.tolist()},
    )


def rosenbrock(n: int = 2, a: float = 1.0, b: float = 100.0) -> ObjectiveSpec:
    """sum_i b (x_{i+1} - x_i^2)^2 + (a - x_i)^2.

    No global Lipschitz constant exists, so ``smoothness_L`` stays unset.
    The minimum (0 at x = a) is only recorded for a in {0, 1}, where
    x_i = a satisfies every chained term.
    """
    n = _dim(n)
    if n < 2:
        raise DomainError("rosenbrock needs n >= 2")

    def f(x):
        head, tail = x[:-1], x[1:]
        return float(np.sum(b * (tail - head**2) ** 2 + (a - head) ** 2))

    def grad(x):
        g = np.zeros_like(x)
        head, tail = x[:-1], x[1:]
        r = tail - head**2
        g[:-1] = -4.0 * b * head * r - 2.0 * (a - head)
        g[1:] += 2.0 * b * r
        return g

    return ObjectiveSpec(
        name="rosenbrock",
        dimension=n,
        evaluate=f,
        gradient=grad,
        f_star=0.0 if a in (0.0, 1.0) else None,
        x_star=np.full(n, float(a)) if a in (0.0, 1.0) else None,
        convexity_class="nonconvex",
        params={"n": n, "a": a, "b": b},
    )


def log_sum_exp(A=None, b=None, n: Optional[int] = None) -> ObjectiveSpec:
    """f(x) = log sum_i exp(<a_i, x> + b_i).

    Without ``A`` the pieces default to a_i = +-e_j, b = 0, whose minimum is
    log(2n) at the origin.  ``smoothness_L`` is the bound max_i |a_i|^2.
    """
    if A is None:
        n = _dim(2 if n is None else n)
        A = np.vstack([np.eye(n), -np.eye(n)])
        b = np.zeros(2 * n)
        known = True
    else:
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=np.float64)
        if b.shape != (A.shape[0],):
            raise ShapeError("b must have one entry per row of A")
        n = A.shape[1]
        known = False
    A = A.copy()
    b = b.copy()

    def f(x):
        z = A @ x + b
        m = z.max()
        return float(m + np.log(np.sum(np.exp(z - m))))

    def grad(x):
        z = A @ x + b
        p = np.exp(z - z.max())
        p /= p.sum()
        return A.T @ p

    return ObjectiveSpec(
        name="logsumexp",
        dimension=n,
        evaluate=f,
        gradient=grad,
        smoothness_L=float(np.max(np.sum(A * A, axis=1))),
        f_star=float(np.log(2 * n)) if known else None,
        x_star=np.zeros(n) if known else None,
        convexity_class="convex",
        params={"A": A.tolist(), "b": b.tolist()},
    )


_CATALOG = {
    "sphere": sphere,
    "quadratic": diagonal_quadratic,
    "rosenbrock": rosenbrock,
    "logsumexp": log_sum_exp,
}


def catalog() -> dict[str, Callable[..., ObjectiveSpec]]:
    """Name -> factory for every built-in objective."""
    return dict(_CATALOG)


def make_objective(name: str, **params) -> ObjectiveSpec:
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise UnknownObjectiveError(f"unknown objective {name!r}; choose from {sorted(_CATALOG)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for objective {name!r}: {exc}") from None


def _dim(n) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    return int(n)


# -- helpers -----------------------------------------------------------------


def finite_difference_gradient(objective, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient using 2n evaluations of ``objective``.

    ``objective`` may be an :class:`ObjectiveSpec` or a :class:`MeteredEvaluator`
    (in which case the evaluations are counted).
    """
    if not h > 0:
        raise DomainError("h must be positive")
    evaluate = objective.evaluate
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(x.size):
        e[i] = h
        g[i] = (evaluate(x + e) - evaluate(x - e)) / (2.0 * h)
        e[i] = 0.0
    if not np.all(np.isfinite(g)):
        raise ObjectivePathologyError(x, g)
    return g


def level_set_radius_quadratic(d, x0) -> float:
    """Radius of ``{x : f(x) <= f(x0)}`` around the minimizer for 0.5 x^T diag(d) x.

    The sublevel set is an ellipsoid whose longest semi-axis lies along the
    smallest curvature, so the radius is sqrt(2 f(x0) / min d).
    """
    d = np.asarray(d, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    if d.shape != x0.shape:
        raise ShapeError("d and x0 must have the same length")
    if not np.all(d > 0):
        raise DomainError("all curvatures d_i must be positive")
    f0 = 0.5 * float(x0 @ (d * x0))
    return math.sqrt(2.0 * f0 / float(d.min()))
