"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each case runs both backends on identical input, checks that the results
agree, and reports the best wall time of ``--repeat`` runs.
"""

import argparse
import json
import sys
import time

import numpy as np

from sdskit import _backend
from sdskit.directions import build_direction_set, maximal_positive_basis, sample_unit_vectors


def random_spanning(n, extra, seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n + 1 + extra, n))
    # append the negated sum so the origin is strictly inside the hull
    V[n] = -V[:n].sum(axis=0) - V[n + 1:].sum(axis=0)
    return build_direction_set(V)


def cases():
    for n in (3, 4, 5):
        D = maximal_positive_basis(n)
        yield f"exact  D+ n={n} (|D|={D.size})", "exact", D, None
    D = random_spanning(4, 6, seed=1)
    yield f"exact  random n=4 (|D|={D.size})", "exact", D, None
    for n, m in ((2, 200_000), (4, 200_000), (8, 100_000)):
        D = maximal_positive_basis(n)
        V = next(sample_unit_vectors(n, m, seed=0))
        yield f"sample D+ n={n} ({m} vectors)", "sampled", D, V


def run(kind, kernels, D, V):
    if kind == "exact":
        value, witness, _ = kernels.exact_candidates(D.matrix, 1e10)
        return float(value)
    value, _ = kernels.sampled_minmax(D.matrix, V)
    return float(value)


def best_time(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return out, best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args(argv)

    if "compiled" not in _backend.BACKENDS:
        print("compiled extension not built; only the numpy fallback is available", file=sys.stderr)
        return 1
    py, cy = _backend.get("python"), _backend.get("compiled")
    results = []
    print(f"{'case':<36} {'python s':>10} {'compiled s':>11} {'speedup':>8}  agree")
    for name, kind, D, V in cases():
        v_py, t_py = best_time(lambda: run(kind, py, D, V), args.repeat)
        v_cy, t_cy = best_time(lambda: run(kind, cy, D, V), args.repeat)
        agree = abs(v_py - v_cy) <= 1e-12
        results.append({"case": name, "python_s": t_py, "compiled_s": t_cy, "value": v_cy, "agree": agree})
        print(f"{name:<36} {t_py:>10.4f} {t_cy:>11.4f} {t_py / t_cy:>7.1f}x  {agree}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0 if all(r["agree"] for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
