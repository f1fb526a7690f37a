"""Compare the compiled kernels against the numpy fallback.

    python3 bench/bench_kernels.py [--repeat 5]

Prints best-of-N wall times per kernel and the max deviation between the
two backends.
"""

import argparse
import time

import numpy as np

from fracwave import kernels
from fracwave.mittag_leffler import ml_table


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_ml(repeat, size=200_000):
    rng = np.random.default_rng(0)
    x = np.exp(rng.uniform(np.log(1e-4), np.log(1e4), size))
    table = ml_table(1.5, 1.0)
    ref = kernels.ml_table_eval(table, x, backend="python")
    rows = [("ml_table_eval python", best_of(lambda: kernels.ml_table_eval(table, x, backend="python"), repeat), 0.0)]
    if kernels.BACKEND == "cython":
        out = kernels.ml_table_eval(table, x, backend="cython")
        dev = float(np.max(np.abs(out - ref)))
        rows.append(("ml_table_eval cython", best_of(lambda: kernels.ml_table_eval(table, x, backend="cython"), repeat), dev))
    return rows


def bench_history(repeat, steps=400, modes=48 * 48 * 25, levels=2000):
    rng = np.random.default_rng(1)
    weights = rng.standard_normal((steps, levels))
    index = rng.integers(0, levels, modes).astype(np.intp)
    history = rng.standard_normal((steps, modes)) + 1j * rng.standard_normal((steps, modes))

    def run(backend):
        out = np.zeros(modes, dtype=complex)
        return kernels.history_accumulate(weights, index, history, out, backend=backend)

    ref = run("python")
    rows = [("history_accumulate python", best_of(lambda: run("python"), repeat), 0.0)]
    if kernels.BACKEND == "cython":
        dev = float(np.max(np.abs(run("cython") - ref)))
        rows.append(("history_accumulate cython", best_of(lambda: run("cython"), repeat), dev))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"compiled backend available: {kernels.BACKEND == 'cython'}, threads={kernels.thread_count()}")
    for group in (bench_ml(args.repeat), bench_history(args.repeat)):
        base = group[0][1]
        for name, secs, dev in group:
            print(f"{name:28s} {secs * 1e3:9.2f} ms  x{base / secs:5.1f}  maxdev {dev:.1e}")


if __name__ == "__main__":
    main()
