"""Simplified direct search toolkit.

Positive-spanning-set geometry, a sufficient-decrease direct search solver
with instrumented traces, three initialization strategies, and a layer that
checks the closed-form worst-case complexity bounds against those traces.
"""

__version__ = "0.1.0"

from ._backend import DEFAULT as KERNEL_BACKEND
from .analysis import (
    BoundReport,
    ProblemConstants,
    certificate_gradient_check,
    eval_count_bound,
    gradient_norm_bound,
    k_epsilon,
    l_cap,
    optimal_c,
    verify_trace,
)
from .directions import (
    CosineMeasureResult,
    DirectionSet,
    best_aligned_direction,
    build_direction_set,
    cosine_measure_exact,
    cosine_measure_sampled,
    is_positive_spanning_set,
    maximal_positive_basis,
)
from .initialization import InitReport, bootstrap_init, forcing_constant_init, stepsize_init
from .objective import MeteredEvaluator, ObjectiveSpec, catalog, make_objective
from .solver import (
    EarlyStopCap,
    OuterIterateRecord,
    PollOutcome,
    SolverConfig,
    SolverTrace,
    check_initialization_assumption,
    poll,
    run_outer_iteration,
    solve,
)
