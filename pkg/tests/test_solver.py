import math

import numpy as np
import pytest

from sdskit.directions import build_direction_set, maximal_positive_basis
from sdskit.errors import ConfigurationError
from sdskit.objective import MeteredEvaluator, ObjectiveSpec, sphere
from sdskit.serialization import dumps, read_trace_csv, trace_csv
from sdskit.solver import (
    EarlyStopCap,
    SolverConfig,
    SolverTrace,
    check_initialization_assumption,
    poll,
    run_outer_iteration,
    solve,
)

D1 = build_direction_set([[1.0], [-1.0]])


def fixture_config(**kw):
    base = dict(x0=(1.0,), alpha0=2.0, c=1.0, max_iterations=3)
    base.update(kw)
    return SolverConfig(**base)


def test_fixture_trace_is_byte_identical(fixture_trace_text):
    trace = solve(sphere(1), D1, fixture_config())
    assert dumps(trace.to_dict()) == fixture_trace_text
    assert [(r.k, r.alpha, r.l, float(r.x[0])) for r in trace.iterates] == [
        (1, 1.0, 1, 0.0), (2, 0.5, 0, 0.0), (3, 0.25, 0, 0.0)
    ]
    assert trace.total_evaluations == 9
    assert trace.cumulative_evaluations() == [1, 5, 7, 9]


def test_trace_round_trip(fixture_trace_text):
    trace = SolverTrace.from_dict(__import__("json").loads(fixture_trace_text))
    assert dumps(trace.to_dict()) == fixture_trace_text


def test_trace_csv_matches_json():
    trace = solve(sphere(2), maximal_positive_basis(2), SolverConfig(x0=(0.7, -1.3), alpha0=1.0, c=0.3,
                                                                      max_iterations=6))
    rows = read_trace_csv(trace_csv(trace))
    for row, rec in zip(rows, trace.iterates):
        d = rec.to_dict()
        assert {k: row[k] for k in ("k", "alpha", "l", "f", "evals", "grad_norm", "status", "x")} == {
            k: d.get(k) for k in ("k", "alpha", "l", "f", "evals", "grad_norm", "status", "x")
        }


def test_sufficient_decrease_is_non_strict():
    ev = MeteredEvaluator(sphere(1))
    # f(1 - 1) = 0 <= 1 - 1 * 1: accepted on equality
    out = poll(ev, ([1.0], 1.0), 1.0, D1, c=1.0)
    assert out.success and out.accepted_direction_index == 1 and out.evaluations_used == 2
    out = poll(ev, ([1.0], 1.0), 1.0, D1, c=1.0 + 1e-9)
    assert out.kind == "unsuccessful" and out.evaluations_used == 2


def test_poll_policies():
    D = maximal_positive_basis(2)
    # x=(1, .5), f=1.25, alpha=.5, c=.1: trials 2.5, .5, 2, 1 against threshold 1.225
    ev = MeteredEvaluator(sphere(2))
    first = poll(ev, ([1.0, 0.5], 1.25), 0.5, D, "first-improvement", 0.1)
    best = poll(ev, ([1.0, 0.5], 1.25), 0.5, D, "best-improvement", 0.1)
    assert (first.evaluations_used, first.accepted_direction_index) == (2, 1)
    assert (best.evaluations_used, best.accepted_direction_index, best.decreases_found) == (4, 1, 2)
    assert best.trial_values == (2.5, 0.5, 2.0, 1.0)
    with pytest.raises(ConfigurationError):
        poll(ev, ([1.0, 0.5], 1.25), 0.0, D)


def test_poll_truncated_by_budget():
    ev = MeteredEvaluator(sphere(1), max_evaluations=1)
    out = poll(ev, ([5.0], 25.0), 1.0, D1, c=100.0)
    assert out.kind == "truncated" and out.evaluations_used == 1


def test_pathological_trial_is_a_failure():
    obj = ObjectiveSpec("half", 1, lambda x: x[0] ** 2 if x[0] > -0.5 else math.nan)
    ev = MeteredEvaluator(obj)
    out = poll(ev, ([0.25], 0.0625), 1.0, D1, c=0.01)
    assert out.kind == "unsuccessful" and math.isnan(out.trial_values[1])


def test_stop_rules():
    t = solve(sphere(1), D1, SolverConfig(x0=(1.0,), alpha0=1.0, c=1.0, min_stepsize=0.3))
    assert t.termination_reason == "min_stepsize" and [r.alpha for r in t.iterates] == [0.5]

    # budget 3: f(x0), f(2) fails, f(0) succeeds, next trial refused mid-sweep
    t = solve(sphere(1), D1, fixture_config(max_iterations=None, max_evaluations=3))
    assert t.termination_reason == "eval_budget" and t.total_evaluations == 3
    assert (t.iterates[-1].status, t.iterates[-1].l, t.iterates[-1].evals) == ("truncated", 1, 2)
    assert not t.complete

    t = solve(sphere(1), D1, fixture_config(target_gap=0.5))
    assert t.termination_reason == "target_gap" and len(t.iterates) == 1

    t = solve(sphere(1), D1, fixture_config(max_iterations=0))
    assert t.iterates == () and t.total_evaluations == 1


def test_early_stop_cap():
    # strongly-convex cap ceil(3 * 0.1 / 1) = 1 success per iteration
    cfg = SolverConfig(x0=(10.0,), alpha0=2.0, c=1.0, max_iterations=1,
                       early_stop_l_cap=EarlyStopCap("strongly-convex", 0.1))
    rec = solve(sphere(1), D1, cfg).iterates[0]
    assert (rec.status, rec.l, rec.evals, float(rec.x[0])) == ("capped", 1, 2, 9.0)
    assert EarlyStopCap("convex", 3.0).limit(c=1.0, alpha=0.5) == 6
    with pytest.raises(ConfigurationError):
        EarlyStopCap("nonconvex", 1.0)


def test_move_to_best_on_unsuccessful():
    # alpha=.2 from .35: success to .15; the failed sweep there sees f(-.05) < f(.15)
    cfg = SolverConfig(x0=(0.35,), alpha0=0.4, c=1.0, max_iterations=1, move_to_best_on_unsuccessful=True)
    rec = solve(sphere(1), D1, cfg).iterates[0]
    assert rec.moved and rec.l == 1 and rec.evals == 4
    assert rec.x[0] == pytest.approx(-0.05) and rec.x_certified[0] == pytest.approx(0.15)
    np.testing.assert_array_equal(rec.certificate_point, rec.x_certified)


def test_run_outer_iteration_directly():
    ev = MeteredEvaluator(sphere(1))
    rec = run_outer_iteration(ev, [1.0], 1.0, 1.0, D1, fixture_config(), k=1)
    assert (rec.l, rec.evals, float(rec.x[0])) == (1, 4, 0.0)
    assert ev.eval_count == 4


def test_solve_validation():
    with pytest.raises(ConfigurationError, match="not a positive spanning set"):
        solve(sphere(2), build_direction_set([[1, 0], [0, 1]]), SolverConfig(x0=(1.0, 1.0), alpha0=1, c=1,
                                                                              max_iterations=2))
    with pytest.raises(ConfigurationError):
        solve(sphere(2), D1, fixture_config())
    bad = ObjectiveSpec("nan", 1, lambda x: math.nan)
    with pytest.raises(ConfigurationError, match="not finite"):
        solve(bad, D1, fixture_config())


@pytest.mark.parametrize(
    "kw",
    [dict(alpha0=0), dict(c=-1), dict(shrink_factor=1.0), dict(poll_policy="random"),
     dict(max_iterations=None), dict(x0=()), dict(x0=(math.nan,)), dict(min_stepsize=0, max_iterations=None)],
)
def test_config_validation(kw):
    with pytest.raises(ConfigurationError):
        fixture_config(**kw)


def test_config_round_trip():
    cfg = fixture_config(early_stop_l_cap=EarlyStopCap("convex", 2.0), poll_policy="best-improvement")
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg


def test_check_initialization_assumption():
    ev = MeteredEvaluator(sphere(1))
    assert check_initialization_assumption(ev, [1.0], 2.0, 1.0, D1)
    assert ev.eval_count == 3
    # f(0) = 0 <= 1 - 1: a sufficient decrease exists
    assert not check_initialization_assumption(ev, [1.0], 1.0, 1.0, D1, f0=1.0)
    assert ev.eval_count == 5
