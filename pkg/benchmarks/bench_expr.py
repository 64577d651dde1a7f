"""Benchmark the compiled expression executor against the NumPy fallback.

Both backends run the same flat postfix programs; this script times
batch evaluation (values + partials) over a range of batch sizes and
checks that the two backends agree to machine precision on every batch.

Usage: python benchmarks/bench_expr.py [--sizes 1000 100000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from phaseq import _exprcore_py, parse
from phaseq._kernel import backend_name, run_with

try:
    from phaseq import _exprcore
except ImportError:
    _exprcore = None

VARS = ("q1", "q2", "p1", "p2")

CORPUS = [
    ("polynomial", "q1^2 * p1 - q2^3 / (1 + p2^2)"),
    ("transcendental", "exp(q1*p2) + sin(q2) * cos(p1)"),
    ("complex product", "(q1 + i*p1) * (q2 - i*p2)"),
    ("mixed", "sqrt(q1 + 2) / (p1 + 3) - (q1 - p1)^4 + i*q2"),
]


def _time_backend(impl, program, points, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        run_with(impl, program, points, True)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print(f"active backend: {backend_name()}")
    if _exprcore is None:
        print("compiled extension not importable; timing the fallback only")
    rng = np.random.default_rng(args.seed)

    header = f"{'expression':<16} {'points':>8} {'python ms':>10}"
    if _exprcore is not None:
        header += f" {'compiled ms':>12} {'speedup':>8} {'max |diff|':>11}"
    print(header)
    print("-" * len(header))

    for label, source in CORPUS:
        expr = parse(source, VARS)
        for size in args.sizes:
            # keep points away from sqrt/div singularities
            points = rng.uniform(0.3, 1.5, size=(size, len(VARS)))
            t_py = _time_backend(_exprcore_py, expr.program, points, args.repeats)
            row = f"{label:<16} {size:>8} {t_py * 1e3:>10.3f}"
            if _exprcore is not None:
                t_c = _time_backend(_exprcore, expr.program, points, args.repeats)
                vals_c, parts_c = run_with(_exprcore, expr.program, points, True)
                vals_py, parts_py = run_with(_exprcore_py, expr.program, points, True)
                diff = max(
                    float(np.abs(vals_c - vals_py).max()),
                    float(np.abs(parts_c - parts_py).max()),
                )
                row += f" {t_c * 1e3:>12.3f} {t_py / t_c:>7.1f}x {diff:>11.2e}"
                if diff > 1e-12:
                    raise SystemExit(f"backend mismatch on {source!r}: {diff:.3e}")
            print(row)


if __name__ == "__main__":
    main()
