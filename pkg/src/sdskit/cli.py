"""Command-line front end.

    sdskit run <config.json>
    sdskit cosine (--file <path> | --mpb <n>)
    sdskit sweep-c <config.json> --grid a,b,c
    sdskit init-compare <config.json>

Exit status: 0 on success, 1 when a checked bound is violated, 2 on a
configuration or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    BoundReport,
    ProblemConstants,
    best_forcing_constant,
    dominant_term,
    make_row,
    optimal_c,
    verify_trace,
)
from .config import ExperimentConfig
from .directions import (
    DirectionSet,
    cosine_measure_exact,
    cosine_measure_sampled,
    load_direction_set,
    maximal_positive_basis,
)
from .errors import ConfigurationError, DegenerateSetError, SDSError
from .initialization import bootstrap_init, forcing_constant_init, stepsize_init
from .objective import MeteredEvaluator
from .serialization import dumps, format_float, trace_csv
from .solver import check_initialization_assumption, solve

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
DEFAULT_SAMPLES = 1_000_000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", help="directory for output files (overrides the config)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--format", choices=("json", "csv", "both"), help="output file format")

    p = _Parser(prog="sdskit", description="Simplified direct search experiments and bound checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", parents=[common], help="initialize, solve and verify the bounds")
    run.add_argument("config")
    run.add_argument("--quiet", action="store_true", help="suppress per-iteration lines")

    cos = sub.add_parser("cosine", parents=[common], help="cosine measure of a direction set")
    src = cos.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", help="direction-set JSON file")
    src.add_argument("--mpb", type=int, metavar="N", help="maximal positive basis of R^N")
    cos.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="sample count for the estimate")

    sw = sub.add_parser("sweep-c", parents=[common], help="bound term and observed cost over a grid of c")
    sw.add_argument("config")
    sw.add_argument("--grid", required=True, help="comma-separated forcing constants")

    ic = sub.add_parser("init-compare", parents=[common], help="compare the three initialization strategies")
    ic.add_argument("config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": cmd_run,
        "cosine": cmd_cosine,
        "sweep-c": cmd_sweep_c,
        "init-compare": cmd_init_compare,
    }[args.command]
    try:
        return handler(args)
    except SDSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


# -- helpers ---------------------------------------------------------------------


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        doc = cfg.to_dict()
        doc["seed"] = args.seed
        cfg = ExperimentConfig.from_dict(doc, base_dir=cfg.base_dir)
    return cfg


def _out_dir(args, cfg=None) -> Path:
    d = Path(args.out_dir if args.out_dir else (cfg.output["dir"] if cfg else "out"))
    if cfg is not None and not d.is_absolute() and not args.out_dir and cfg.base_dir:
        d = Path(cfg.base_dir) / d
    d.mkdir(parents=True, exist_ok=True)
    return d


def _formats(args, cfg=None) -> set:
    fmt = args.format or (cfg.output["format"] if cfg else "json")
    return {"json", "csv"} if fmt == "both" else {fmt}


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, float) else ("" if v is None else v) for v in row])
    return buf.getvalue()


def _spanning_directions(cfg, objective) -> tuple[DirectionSet, float]:
    D = cfg.build_directions()
    if D.dimension != objective.dimension:
        raise ConfigurationError(f"directions: dimension {D.dimension} does not match the objective")
    try:
        mu = cosine_measure_exact(D).mu
    except DegenerateSetError:
        mu = 0.0
    if not mu > 1e-9:
        raise ConfigurationError("directions: not a positive spanning set")
    return D, mu


def _initialize(cfg, objective, D):
    """Apply the configured init strategy; returns (x0, alpha0, c, InitReport or None)."""
    init = cfg.init
    x_start = cfg.solver["x0"]
    ev = MeteredEvaluator(objective)
    kw = {"max_evaluations": init.get("max_evaluations")}
    s = cfg.strategy
    if s == "none":
        return np.asarray(x_start, dtype=np.float64), cfg.solver["alpha0"], cfg.solver["c"], None
    if s == "bootstrap":
        rep = bootstrap_init(ev, x_start, init["alpha0"], init["c"], D, policy=cfg.solver["poll_policy"], **kw)
    elif s == "stepsize":
        rep = stepsize_init(ev, x_start, init["alpha_tilde0"], init["c"], D, verify=init.get("verify"), **kw)
    else:
        rep = forcing_constant_init(ev, x_start, init["alpha0"], D)
    return rep.x0, rep.alpha0, rep.c, rep


# -- commands --------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _load(args)
    objective = cfg.build_objective()
    D, mu = _spanning_directions(cfg, objective)
    x0, alpha0, c, init_report = _initialize(cfg, objective, D)

    if init_report is not None:
        certified = init_report.initialization_certified
    elif cfg.analysis["certify_initialization"]:
        certified = check_initialization_assumption(MeteredEvaluator(objective), x0, alpha0, c, D)
    else:
        certified = None

    scfg = cfg.solver_config(alpha0, c, x0)
    trace = solve(objective, D, scfg)

    regime = cfg.regime(objective)
    lam = objective.strong_convexity_lambda if regime == "strongly-convex" else 0.0
    constants = ProblemConstants(
        mu=mu,
        cardinality_D=D.size,
        c=scfg.c,
        alpha0=scfg.alpha0,
        L=objective.smoothness_L,
        lam=lam,
        f_star=objective.f_star,
        f0=trace.f0,
        R0=cfg.R0(objective, x0) if regime == "convex" else None,
        shrink_factor=scfg.shrink_factor,
    )
    report = verify_trace(
        trace, constants, regime,
        gradient=objective.gradient,
        x_star=objective.x_star,
        initialization_certified=certified,
        epsilons=cfg.analysis["epsilons"],
        rel_tol=cfg.analysis["rel_tol"],
    )
    if init_report is not None:
        report.rows.extend(_init_report_rows(init_report, objective, cfg.init.get("alpha_tilde0")))

    if not args.quiet:
        for r in trace.iterates:
            g = "" if r.grad_norm is None else f" grad_norm={r.grad_norm:.9g}"
            print(f"k={r.k} alpha={r.alpha:.9g} l={r.l} f={r.f:.9g} evals={r.evals}{g} status={r.status}")
        print(f"termination={trace.termination_reason} total_evaluations={trace.total_evaluations}")

    out = _out_dir(args, cfg)
    stem = cfg.output["stem"]
    formats = _formats(args, cfg)
    extra = {"mu": mu, "initialization_certified": certified, "seed": cfg.seed}
    samples = cfg.analysis["sampled_mu_samples"]
    if samples:
        extra["mu_sampled"] = cosine_measure_sampled(D, samples, cfg.seed).mu
    if "json" in formats:
        _write(out / f"{stem}.json", dumps(trace.to_dict()))
        _write(out / f"{stem}.report.json", dumps({**report.to_dict(), **extra}))
        if init_report is not None:
            _write(out / f"{stem}.init.json", dumps(init_report.to_dict()))
    if "csv" in formats:
        _write(out / f"{stem}.csv", trace_csv(trace))
        rows = [[r.check, r.k, r.observed, r.bound, r.passed, r.hard, r.note] for r in report.rows]
        _write(out / f"{stem}.report.csv",
               _rows_csv(["check", "k", "observed", "bound", "passed", "hard", "note"], rows))
    print(report.to_table())
    return EXIT_OK if report.all_pass else EXIT_VIOLATION


def _init_report_rows(rep, objective, alpha_tilde0=None) -> list:
    rows = []
    if rep.theoretical_cost_bound is not None:
        rows.append(make_row("init_evaluations", 0, rep.evaluations_used, rep.theoretical_cost_bound,
                             note=rep.strategy))
    if rep.stepsize_ratio_bound is not None and alpha_tilde0 is not None:
        rows.append(make_row("init_stepsize_ratio", 0, rep.alpha0 / alpha_tilde0, rep.stepsize_ratio_bound,
                             note=rep.strategy))
    must_certify = rep.strategy != "stepsize" or objective.convexity_class != "nonconvex"
    rows.append(make_row("init_certificate", 0, 0.0 if rep.initialization_certified else 1.0, 0.0,
                         hard=must_certify, note=rep.strategy))
    return rows


def cmd_cosine(args) -> int:
    try:
        if args.file is not None:
            D = load_direction_set(args.file)
        else:
            D = maximal_positive_basis(args.mpb)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {args.file}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{args.file}: invalid JSON ({exc.msg})") from None
    if args.samples < 1:
        raise ConfigurationError("--samples must be positive")
    seed = 0 if args.seed is None else args.seed

    doc = {"dimension": D.dimension, "size": D.size}
    try:
        exact = cosine_measure_exact(D)
        doc["mu_exact"] = exact.mu
        doc["witness_exact"] = [float(v) for v in exact.witness_v]
        spanning = exact.mu > 1e-9
    except DegenerateSetError:
        exact = None
        doc["mu_exact"] = None
        spanning = False
    sampled = cosine_measure_sampled(D, args.samples, seed)
    doc["mu_sampled"] = sampled.mu
    doc["witness_sampled"] = [float(v) for v in sampled.witness_v]
    doc["samples"] = args.samples
    doc["seed"] = seed
    doc["size_over_mu_squared"] = exact.ratio(D.size) if spanning else None
    doc["positive_spanning"] = spanning

    mu_text = "degenerate (directions do not span)" if exact is None else f"{exact.mu:.9g}"
    print(f"dimension={D.dimension} size={D.size}")
    print(f"mu (exact)   = {mu_text}")
    if exact is not None:
        print("witness      = [" + ", ".join(f"{v:.9g}" for v in exact.witness_v) + "]")
    print(f"mu (sampled) = {sampled.mu:.9g}  ({args.samples} samples, seed {seed})")
    if spanning:
        print(f"|D|/mu^2     = {doc['size_over_mu_squared']:.9g}")
    print(f"positive spanning set: {'yes' if spanning else 'no'}")
    if args.out_dir:
        out = _out_dir(args)
        formats = _formats(args)
        if "json" in formats:
            _write(out / "cosine.json", dumps(doc))
        if "csv" in formats:
            keys = ["dimension", "size", "mu_exact", "mu_sampled", "size_over_mu_squared", "positive_spanning"]
            _write(out / "cosine.csv", _rows_csv(keys, [[doc[k] for k in keys]]))
    return EXIT_OK


def _parse_grid(text: str) -> list[float]:
    try:
        grid = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigurationError(f"--grid: cannot parse {text!r}") from None
    if not grid or not all(math.isfinite(c) and c > 0 for c in grid):
        raise ConfigurationError("--grid: need one or more positive numbers")
    return grid


def cmd_sweep_c(args) -> int:
    cfg = _load(args)
    grid = _parse_grid(args.grid)
    objective = cfg.build_objective()
    L = objective.smoothness_L
    if L is None:
        raise ConfigurationError("sweep-c needs a known L (objective.L)")
    D, mu = _spanning_directions(cfg, objective)
    regime = cfg.regime(objective)
    x0 = np.asarray(cfg.solver["x0"], dtype=np.float64)
    alpha0 = cfg.solver.get("alpha0", cfg.init.get("alpha0", cfg.init.get("alpha_tilde0")))
    if alpha0 is None:
        raise ConfigurationError("sweep-c needs solver.alpha0 or init.alpha0")
    R0 = cfg.R0(objective, x0) or 1.0
    lam = objective.strong_convexity_lambda or 1.0

    rows = []
    for c in grid:
        term = dominant_term(c, L, regime, R0=R0, mu=mu, lam=lam)
        trace = solve(objective, D, cfg.solver_config(alpha0, c))
        rows.append([c, term, trace.total_evaluations, trace.iterates[-1].f if trace.iterates else trace.f0])
    best = best_forcing_constant(grid, L, regime, R0=R0, mu=mu, lam=lam)
    observed_best = grid[int(np.argmin([r[2] for r in rows]))]
    text = _rows_csv(["c", "bound_term", "observed_N", "final_f"], rows)
    print(text, end="")
    print(f"bound-term argmin c={best:.9g}; optimal c=L/2={optimal_c(L):.9g}; observed-N argmin c={observed_best:.9g}")

    out = _out_dir(args, cfg)
    formats = _formats(args, cfg)
    if "csv" in formats:
        _write(out / "sweep_c.csv", text)
    if "json" in formats:
        doc = {"regime": regime, "L": L, "grid": grid, "bound_argmin": best, "observed_argmin": observed_best,
               "rows": [dict(zip(["c", "bound_term", "observed_N", "final_f"], r)) for r in rows]}
        _write(out / "sweep_c.json", dumps(doc))
    half = optimal_c(L)
    if any(c == half for c in grid) and best != half:
        print("FAIL: bound-term argmin is not L/2", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_init_compare(args) -> int:
    cfg = _load(args)
    objective = cfg.build_objective()
    D, _ = _spanning_directions(cfg, objective)
    init = cfg.init
    missing = [k for k in ("alpha0", "c", "alpha_tilde0") if k not in init]
    if missing:
        raise ConfigurationError(f"init.{missing[0]}: required by init-compare")
    x = cfg.solver["x0"]
    budget = {"max_evaluations": init.get("max_evaluations")}
    reports = [
        bootstrap_init(MeteredEvaluator(objective), x, init["alpha0"], init["c"], D,
                       policy=cfg.solver["poll_policy"], **budget),
        stepsize_init(MeteredEvaluator(objective), x, init["alpha_tilde0"], init["c"], D,
                      verify=init.get("verify"), **budget),
        forcing_constant_init(MeteredEvaluator(objective), x, init["alpha0"], D),
    ]
    report = BoundReport("initialization")
    rows = []
    for rep in reports:
        report.rows.extend(_init_report_rows(rep, objective, init["alpha_tilde0"]))
        rows.append([rep.strategy, rep.evaluations_used, rep.theoretical_cost_bound, rep.alpha0, rep.c,
                     rep.initialization_certified])
    header = ["strategy", "evaluations_used", "theoretical_cost_bound", "alpha0", "c", "initialization_certified"]
    print(f"{header[0]:<17} {'evals':>6} {'bound':>14} {'alpha0':>14} {'c':>14}  certified")
    for s, n, b, a, c, ok in rows:
        btxt = "n/a" if b is None else f"{b:.9g}"
        print(f"{s:<17} {n:>6} {btxt:>14} {a:>14.9g} {c:>14.9g}  {ok}")

    out = _out_dir(args, cfg)
    formats = _formats(args, cfg)
    if "csv" in formats:
        _write(out / "init_compare.csv", _rows_csv(header, rows))
    if "json" in formats:
        _write(out / "init_compare.json", dumps({
            "reports": [r.to_dict() for r in reports],
            "checks": report.to_dict(),
        }))
    for row in report.violations():
        print(f"FAIL: {row.check} ({row.note}) observed {row.observed:.9g} > bound {row.bound:.9g}",
              file=sys.stderr)
    return EXIT_OK if report.all_pass else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
