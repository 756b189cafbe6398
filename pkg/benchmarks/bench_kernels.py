"""Benchmark the compiled kernels against the pure-NumPy twins.

Runs each hot kernel on representative workloads with both backends and
prints per-kernel timings and speedups. Usage:

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from gaitphase import _kernels_py as pure

try:
    from gaitphase import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def make_workloads(seed=0):
    rng = np.random.default_rng(seed)

    # 20 s of 1 kHz signal, 300 ms windows, 10 ms stride: one sweep cell
    x = rng.standard_normal(20_000)
    starts = np.arange(0, 20_000 - 300 + 1, 10, dtype=np.int64)

    n = 4_000
    X = rng.standard_normal((n, 4))
    y = (X[:, 0] + 0.5 * rng.standard_normal(n) > 0).astype(np.float64)
    g = y - 0.5
    h = np.full(n, 0.25)
    idx = np.arange(n, dtype=np.int64)

    m = 600
    Xs = X[:m]
    ys = np.where(y[:m] > 0, 1.0, -1.0)
    d2 = ((Xs[:, None, :] - Xs[None, :, :]) ** 2).sum(-1)
    K = np.exp(-0.5 * d2)

    tree = pure.grow_tree(X, y, None, idx, 4, 10, 1, 2, 0, 0.0, 7)

    return {
        "window_features (1971 windows x 300)":
            lambda b: b.window_features(x, starts, 300),
        "grow_tree gini (4000 x 4, depth 10)":
            lambda b: b.grow_tree(X, y, None, idx, 4, 10, 1, 2, 0, 0.0, 7),
        "grow_tree newton (4000 x 4, depth 6)":
            lambda b: b.grow_tree(X, g, h, idx, 4, 6, 5, 2, 1, 1e-6, 7),
        "predict_tree (4000 rows)":
            lambda b: b.predict_tree(*tree, X),
        "smo_solve (600 x 600 gram)":
            lambda b: b.smo_solve(K, ys, 1.0, 1e-3, 100_000, False),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many runs")
    args = parser.parse_args()

    if compiled is None:
        print("compiled extension not available; showing pure backend only")

    workloads = make_workloads()
    width = max(len(k) for k in workloads)
    header = f"{'kernel':<{width}} {'pure':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, run in workloads.items():
        t_pure = best_of(lambda: run(pure), args.repeats)
        if compiled is not None:
            t_comp = best_of(lambda: run(compiled), args.repeats)
            print(f"{name:<{width}} {t_pure * 1e3:>8.2f}ms {t_comp * 1e3:>8.2f}ms "
                  f"{t_pure / t_comp:>7.1f}x")
        else:
            print(f"{name:<{width}} {t_pure * 1e3:>8.2f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
