"""Closed-form complexity bounds and their verification against traces.

All bounds are written for a general shrink factor ``s`` with ``r = 1/s``;
with ``s = 0.5`` they are the usual halving-stepsize statements.  Notation:

    gradient bound   |grad f(x_k)| <= (L/2 + c) alpha_k / mu
    convex constant  B = R0 (L/2 + c) / mu
    strong constant  S = (L/2 + c)^2 / (2 lambda mu^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .serialization import format_float

REGIMES = ("nonconvex", "convex", "strongly-convex")
REL_TOL = 1e-9


@dataclass(frozen=True)
class ProblemConstants:
    mu: float
    cardinality_D: int
    c: float
    alpha0: float
    L: Optional[float] = None
    lam: float = 0.0
    f_star: Optional[float] = None
    f0: Optional[float] = None
    R0: Optional[float] = None
    shrink_factor: float = 0.5

    def __post_init__(self):
        if not 0 < self.mu <= 1 + 1e-12:
            raise DomainError(f"mu must lie in (0, 1], got {self.mu!r}")
        if self.L is not None and not self.L > 0:
            raise DomainError("L must be positive")
        if self.lam < 0:
            raise DomainError("lambda must be >= 0")
        if self.R0 is not None and self.R0 < 0:
            raise DomainError("R0 must be >= 0")
        if not (self.c > 0 and self.alpha0 > 0):
            raise DomainError("c and alpha0 must be positive")
        if not 0 < self.shrink_factor < 1:
            raise DomainError("shrink_factor must lie in (0, 1)")

    @property
    def rate(self) -> float:
        return 1.0 / self.shrink_factor

    @property
    def half_L_plus_c(self) -> float:
        return self._need("L") / 2.0 + self.c

    @property
    def B(self) -> float:
        return self._need("R0") * self.half_L_plus_c / self.mu

    @property
    def S(self) -> float:
        if not self.lam > 0:
            raise ConfigurationError("strong-convexity constant lambda must be positive")
        return self.half_L_plus_c**2 / (2.0 * self.lam * self.mu**2)

    def alpha(self, k: int) -> float:
        """Stepsize at outer iteration k, computed exactly as the solver does."""
        a = float(self.alpha0)
        for _ in range(k):
            a *= self.shrink_factor
        return a

    def _need(self, name):
        v = getattr(self, name)
        if v is None:
            raise ConfigurationError(f"constant {name} is required for this bound")
        return v


def _log_rate(x: float, rate: float) -> float:
    return math.log2(x) if rate == 2.0 else math.log(x) / math.log(rate)


def _check_regime(regime):
    if regime not in REGIMES:
        raise ConfigurationError(f"regime must be one of {REGIMES}, got {regime!r}")


# -- pointwise bounds ------------------------------------------------------------


def gradient_norm_bound(constants: ProblemConstants, k: int) -> float:
    """(L/2 + c) alpha0 s^k / mu."""
    if constants.mu <= 0:
        raise DomainError("mu must be positive")
    if k < 0:
        raise DomainError("k must be >= 0")
    return constants.half_L_plus_c * constants.alpha(k) / constants.mu


def f_gap_bound(constants: ProblemConstants, k: int, regime: str) -> float:
    _check_regime(regime)
    if regime == "convex":
        return constants.B * constants.alpha(k)
    if regime == "strongly-convex":
        return constants.S * constants.alpha(k) ** 2
    raise ConfigurationError("no function-gap bound in the nonconvex regime")


def distance_bound(constants: ProblemConstants, k: int) -> float:
    """|x_k - x*| <= (L/2 + c) alpha_k / (mu lambda) under strong convexity."""
    if not constants.lam > 0:
        raise ConfigurationError("distance bound needs lambda > 0")
    return constants.half_L_plus_c * constants.alpha(k) / (constants.mu * constants.lam)


def l_cap(constants: ProblemConstants, k: int, regime: str, f_prev: Optional[float] = None) -> float:
    """Upper bound on the number of successes in outer iteration k >= 1.

    ``nonconvex`` uses the descent argument (f(x_{k-1}) - f*) / (c alpha_k^2)
    and needs ``f_prev`` (defaults to f0); the convex regimes use the
    function-gap bound at iteration k - 1.
    """
    _check_regime(regime)
    if k < 1:
        raise DomainError("success caps are defined for k >= 1")
    a = constants.alpha(k)
    if regime == "nonconvex":
        f_prev = constants._need("f0") if f_prev is None else f_prev
        return (f_prev - constants._need("f_star")) / (constants.c * a * a)
    if regime == "convex":
        return constants.B * constants.rate / (constants.c * a)
    return constants.S * constants.rate**2 / constants.c


# -- k(eps) and evaluation counts ------------------------------------------------


def _quality(constants, k, regime):
    if regime == "nonconvex":
        return gradient_norm_bound(constants, k)
    return f_gap_bound(constants, k, regime)


def k_epsilon(constants: ProblemConstants, epsilon: float, regime: str) -> int:
    """Smallest k at which the regime's accuracy guarantee drops to ``epsilon``.

    The guarantee is the gradient bound (nonconvex) or the function-gap
    bound (convex, strongly convex); the result equals the usual
    ceiling-of-logarithm formula.
    """
    _check_regime(regime)
    if regime == "nonconvex":
        top = constants.half_L_plus_c * constants.alpha0 / constants.mu
        if not 0 < epsilon < top:
            raise DomainError(f"nonconvex regime needs 0 < epsilon < (L/2+c) alpha0 / mu = {top!r}")
        t = top / epsilon
    elif regime == "convex":
        top = constants.B * constants.alpha0
        if not 0 < epsilon <= top:
            raise DomainError(f"convex regime needs 0 < epsilon <= B alpha0 = {top!r}")
        t = top / epsilon
    else:
        top = constants.S * constants.alpha0**2
        if not 0 < epsilon < top:
            raise DomainError(f"strongly convex regime needs 0 < epsilon < S alpha0^2 = {top!r}")
        t = constants.alpha0 * math.sqrt(constants.S / epsilon)
    k = max(0, math.ceil(_log_rate(t, constants.rate)))
    # guard the ceiling against rounding in the logarithm
    while k > 0 and _quality(constants, k - 1, regime) <= epsilon:
        k -= 1
    while _quality(constants, k, regime) > epsilon:
        k += 1
    return k


def eval_count_bound(constants: ProblemConstants, regime: str, *, k: Optional[int] = None,
                     epsilon: Optional[float] = None) -> float:
    """Worst-case N for ``k`` outer iterations, or for reaching ``epsilon``.

    Exactly one of ``k`` and ``epsilon`` must be given.  The ``k`` form sums
    the per-iteration success caps; the ``epsilon`` form is the simplified
    closed-form bound evaluated at k(epsilon).
    """
    _check_regime(regime)
    if (k is None) == (epsilon is None):
        raise ConfigurationError("give exactly one of k and epsilon")
    p = constants.cardinality_D
    r = constants.rate
    if k is not None:
        if k < 0:
            raise DomainError("k must be >= 0")
        if regime == "nonconvex":
            gap = constants._need("f0") - constants._need("f_star")
            geom = r * r * (r ** (2 * k) - 1.0) / (r * r - 1.0)
            return 1.0 + k * p + p * gap * geom / (constants.c * constants.alpha0**2)
        if regime == "convex":
            geom = r * (r**k - 1.0) / (r - 1.0)
            return 1.0 + k * p + constants.B * r * p * geom / (constants.c * constants.alpha0)
        return 1.0 + k * p * (r * r * constants.S / constants.c + 1.0)

    ke = k_epsilon(constants, epsilon, regime)
    if regime == "nonconvex":
        gap = constants._need("f0") - constants._need("f_star")
        lead = r**4 * gap * constants.half_L_plus_c**2 / ((r * r - 1.0) * constants.c * constants.mu**2 * epsilon**2)
        return 1.0 + p * (ke + lead)
    if regime == "convex":
        return 1.0 + p * (ke + r**3 * constants.B**2 / ((r - 1.0) * constants.c * epsilon))
    steps = 1.0 + _log_rate(constants.alpha0 * math.sqrt(constants.S / epsilon), r)
    return 1.0 + p * (r * r * constants.S / constants.c + 1.0) * steps


# -- forcing constant --------------------------------------------------------------


def optimal_c(L: float) -> float:
    """The forcing constant minimizing every regime's dominant bound term."""
    if not L > 0:
        raise DomainError("L must be positive")
    return L / 2.0


def dominant_term(c: float, L: float, regime: str, *, R0: float = 1.0, mu: float = 1.0,
                  lam: float = 1.0) -> float:
    """The c-dependent factor of the leading evaluation-count term.

    nonconvex (L/2+c)^2/c, convex B^2/c, strongly convex S/c.
    """
    _check_regime(regime)
    h = L / 2.0 + c
    if regime == "nonconvex":
        return h * h / c
    if regime == "convex":
        return (R0 * h / mu) ** 2 / c
    return h * h / (2.0 * lam * mu * mu) / c


def best_forcing_constant(grid: Sequence[float], L: float, regime: str, **kw) -> float:
    """Grid point minimizing :func:`dominant_term` (lowest index on ties)."""
    grid = list(grid)
    if not grid:
        raise DomainError("grid is empty")
    values = [dominant_term(c, L, regime, **kw) for c in grid]
    return grid[int(np.argmin(values))]


# -- verification ----------------------------------------------------------------


@dataclass(frozen=True)
class BoundRow:
    check: str
    k: Optional[int]
    observed: float
    bound: float
    passed: bool
    hard: bool = True
    note: str = ""

    @property
    def margin(self) -> float:
        return (self.bound - self.observed) / (1.0 + abs(self.bound))

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "k": self.k,
            "observed": float(self.observed),
            "bound": float(self.bound),
            "margin": float(self.margin),
            "passed": self.passed,
            "hard": self.hard,
            "note": self.note,
        }


def make_row(check, k, observed, bound, *, hard=True, note="", rel_tol=REL_TOL) -> BoundRow:
    observed = float(observed)
    bound = float(bound)
    passed = observed <= bound + rel_tol * (1.0 + abs(bound))
    return BoundRow(check, k, observed, bound, passed, hard, note)


@dataclass
class BoundReport:
    regime: str
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def hard_rows(self):
        return [r for r in self.rows if r.hard]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.hard_rows)

    @property
    def worst_margin(self) -> float:
        margins = [r.margin for r in self.hard_rows]
        return min(margins) if margins else math.inf

    def violations(self):
        return [r for r in self.hard_rows if not r.passed]

    def rows_for(self, check: str):
        return [r for r in self.rows if r.check == check]

    def to_dict(self) -> dict:
        wm = self.worst_margin
        return {
            "regime": self.regime,
            "all_pass": self.all_pass,
            "worst_margin": None if math.isinf(wm) else wm,
            "skipped": list(self.skipped),
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_table(self) -> str:
        head = f"{'check':<20} {'k':>4} {'observed':>17} {'bound':>17}  result"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            verdict = "pass" if r.passed else "FAIL"
            if not r.hard:
                verdict += " (advisory)"
            k = "" if r.k is None else str(r.k)
            lines.append(
                f"{r.check:<20} {k:>4} {format_float(r.observed, 9):>17} {format_float(r.bound, 9):>17}  {verdict}"
            )
        for s in self.skipped:
            lines.append(f"skipped: {s}")
        lines.append(f"all_pass={self.all_pass} worst_margin={self.worst_margin:.9g}")
        return "\n".join(lines)


def certificate_gradient_check(trace, constants: ProblemConstants,
                               gradient: Optional[Callable] = None, rel_tol: float = REL_TOL):
    """Gradient-norm bound at every certified iterate, one row per iterate.

    Only L-smoothness is needed, so this applies to nonconvex objectives.
    Returns an empty list when L is unknown.
    """
    if constants.L is None:
        return []
    rows = []
    for rec in trace.iterates:
        if rec.moved and gradient is not None:
            observed = float(np.linalg.norm(gradient(rec.certificate_point)))
        elif rec.grad_norm is not None and not rec.moved:
            observed = rec.grad_norm
        elif gradient is not None:
            observed = float(np.linalg.norm(gradient(rec.x)))
        else:
            continue
        bound = constants.half_L_plus_c * rec.alpha / constants.mu
        rows.append(make_row("gradient_norm", rec.k, observed, bound, hard=rec.certified,
                             note="" if rec.certified else f"iterate {rec.status}", rel_tol=rel_tol))
    return rows


def verify_trace(trace, constants: ProblemConstants, regime: str, *,
                 gradient: Optional[Callable] = None, x_star=None,
                 initialization_certified: Optional[bool] = None, epsilons: Sequence[float] = (),
                 rel_tol: float = REL_TOL) -> BoundReport:
    """Compare every observed quantity in ``trace`` with its bound.

    Rows whose hypotheses are not met (truncated or capped iterates, the
    first iteration in the convex regimes without a certified starting
    triple, runs that move to the best point after a failed sweep) are kept
    as advisory rows and do not affect ``all_pass``.
    """
    _check_regime(regime)
    report = BoundReport(regime)
    if regime != "nonconvex":
        for name in ("L", "f_star"):
            if getattr(constants, name) is None:
                raise ConfigurationError(f"{regime} verification needs constant {name}")
        if regime == "convex" and constants.R0 is None:
            raise ConfigurationError("convex verification needs R0")
        if regime == "strongly-convex" and not constants.lam > 0:
            raise ConfigurationError("strongly convex verification needs lambda > 0")
    if constants.f0 is not None and constants.f0 != trace.f0:
        raise ConfigurationError("constants.f0 does not match the trace")
    cfg = trace.config
    if (cfg.c, cfg.alpha0, cfg.shrink_factor) != (constants.c, constants.alpha0, constants.shrink_factor):
        raise ConfigurationError("constants (c, alpha0, shrink_factor) do not match the trace config")
    if constants.cardinality_D != trace.directions.size:
        raise ConfigurationError("constants.cardinality_D does not match the trace")

    row = lambda *a, **kw: report.rows.append(make_row(*a, rel_tol=rel_tol, **kw))
    moved_any = any(r.moved for r in trace.iterates)
    init_ok = bool(initialization_certified) and not moved_any
    have_L = constants.L is not None
    have_fstar = constants.f_star is not None
    if not have_L:
        report.skipped.append("gradient and L-dependent bounds: L unknown")
    if not have_fstar:
        report.skipped.append("success caps and evaluation bounds: f* unknown")
    if initialization_certified is None and regime != "nonconvex":
        report.skipped.append("first-iteration caps advisory: initialization not certified")
    if moved_any:
        report.skipped.append("move-to-best was on: bounds reported as advisory")
    xs = None if x_star is None else np.asarray(x_star, dtype=np.float64)

    # k = 0, covered only when the starting triple is certified
    if regime != "nonconvex" and have_L:
        if trace.grad_norm0 is not None or gradient is not None:
            g0 = trace.grad_norm0
            if g0 is None:
                g0 = float(np.linalg.norm(gradient(np.asarray(cfg.x0))))
            row("gradient_norm", 0, g0, gradient_norm_bound(constants, 0), hard=init_ok)
        row("f_gap", 0, trace.f0 - constants.f_star, f_gap_bound(constants, 0, regime), hard=init_ok)
        if regime == "strongly-convex" and xs is not None:
            row("distance", 0, np.linalg.norm(np.asarray(cfg.x0) - xs), distance_bound(constants, 0),
                hard=init_ok)

    f_prev = trace.f0
    n_obs = 1
    intact = True
    for rec in trace.iterates:
        k = rec.k
        intact = intact and rec.certified
        hard = intact and not moved_any
        note = "" if rec.certified else f"iterate {rec.status}"
        n_obs += rec.evals
        row("evals_per_iteration", k, rec.evals, D_l_bound(trace, rec), note=note)
        if have_L:
            for g in certificate_gradient_check(_Single(rec), constants, gradient, rel_tol):
                report.rows.append(BoundRow(g.check, g.k, g.observed, g.bound, g.passed,
                                            g.hard and hard, g.note))
        if have_fstar:
            row("l_cap_descent", k, rec.l, l_cap(constants, k, "nonconvex", f_prev=f_prev),
                hard=hard and rec.certified, note=note)
        if regime != "nonconvex":
            first_ok = k > 1 or init_ok
            row("f_gap", k, rec.f - constants.f_star, f_gap_bound(constants, k, regime),
                hard=hard, note=note)
            row("l_cap_" + ("convex" if regime == "convex" else "strong"), k, rec.l,
                l_cap(constants, k, regime), hard=hard and first_ok, note=note)
            if regime == "strongly-convex" and xs is not None:
                row("distance", k, np.linalg.norm(rec.x - xs), distance_bound(constants, k),
                    hard=hard, note=note)
        if regime == "nonconvex" and have_fstar or regime != "nonconvex":
            row("evals_exact_k", k, n_obs, eval_count_bound(constants, regime, k=k),
                hard=hard and (regime == "nonconvex" or init_ok), note=note)
        f_prev = rec.f

    total = 1 + sum(r.evals for r in trace.iterates)
    row("evals_total_consistent", None, abs(trace.total_evaluations - total), 0.0)

    cumulative = trace.cumulative_evaluations()
    for eps in epsilons:
        if regime == "nonconvex" and not (have_L and have_fstar):
            continue
        try:
            ke = k_epsilon(constants, eps, regime)
        except DomainError as exc:
            report.skipped.append(f"epsilon={eps!r}: {exc}")
            continue
        if ke > len(trace.iterates):
            report.skipped.append(f"epsilon={eps!r}: k(eps)={ke} beyond the trace")
            continue
        hard = init_ok or regime == "nonconvex"
        hard = hard and all(r.certified for r in trace.iterates[:ke]) and not moved_any
        note = f"epsilon={format_float(eps, 9)}"
        row("evals_at_k_eps", ke, cumulative[ke], eval_count_bound(constants, regime, epsilon=eps),
            hard=hard, note=note)
        if regime == "nonconvex":
            if ke >= 1:
                rec = trace.iterates[ke - 1]
                g = rec.grad_norm
                if g is None and gradient is not None:
                    g = float(np.linalg.norm(gradient(rec.x)))
                if g is not None:
                    row("target_at_k_eps", ke, g, eps, hard=hard, note=note)
        else:
            f_k = trace.f0 if ke == 0 else trace.iterates[ke - 1].f
            row("target_at_k_eps", ke, f_k - constants.f_star, eps, hard=hard, note=note)
    return report


def D_l_bound(trace, rec) -> int:
    return trace.directions.size * (rec.l + 1)


class _Single:
    def __init__(self, rec):
        self.iterates = (rec,)
