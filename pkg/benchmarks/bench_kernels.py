#!/usr/bin/env python3
"""Benchmark: compiled convolution kernel vs the pure-Python twin.

The workload is the hot path of the figure-sized grids: numerical
convolution of Weibull processing times over a (u, tau) grid.  Run after
installing the package:

    python benchmarks/bench_kernels.py [--steps 40] [--k 1.5]
"""

import argparse
import time

import numpy as np

from archlab import _pykernels

try:
    from archlab import _ckernels
except ImportError:
    _ckernels = None


def grid_workload(backend, k: float, steps: int) -> float:
    us = np.linspace(0.5, 10.0, steps)
    taus = np.linspace(0.01, 5.0, steps)
    acc = 0.0
    for u in us:
        for tau in taus:
            val, ok = backend.conv_cdf(1, k, float(u), float(tau), 1e-8, 40)
            assert ok
            acc += val
    return acc


def scalar_workload(backend, n: int = 2000) -> float:
    acc = 0.0
    for i in range(n):
        tau = 0.01 + 4.99 * i / (n - 1)
        val, ok = backend.conv_cdf(1, 0.7, 1.3, tau, 1e-8, 40)
        acc += val
    return acc


def timed(fn, *args) -> tuple[float, float]:
    start = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - start, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=40)
    parser.add_argument("--k", type=float, default=1.5)
    args = parser.parse_args()

    print(f"workload 1: {args.steps}x{args.steps} Weibull(k={args.k}) "
          f"convolution grid")
    print(f"workload 2: 2000 scalar convolutions, Weibull(k=0.7, u=1.3)")
    print()

    rows = []
    t_pure_grid, sum_pure = timed(grid_workload, _pykernels, args.k, args.steps)
    t_pure_scalar, _ = timed(scalar_workload, _pykernels)
    rows.append(("pure-python", t_pure_grid, t_pure_scalar))

    if _ckernels is None:
        print("compiled kernel not built; pure-Python numbers only")
    else:
        t_c_grid, sum_c = timed(grid_workload, _ckernels, args.k, args.steps)
        t_c_scalar, _ = timed(scalar_workload, _ckernels)
        rows.append(("cython", t_c_grid, t_c_scalar))
        assert abs(sum_pure - sum_c) <= 1e-9 * max(abs(sum_pure), 1.0), \
            "backends disagree"

    print(f"{'backend':<14} {'grid (s)':>10} {'scalar (s)':>12}")
    for name, t_grid, t_scalar in rows:
        print(f"{name:<14} {t_grid:>10.3f} {t_scalar:>12.3f}")
    if len(rows) == 2:
        print()
        print(f"speedup: grid x{rows[0][1] / rows[1][1]:.1f}, "
              f"scalar x{rows[0][2] / rows[1][2]:.1f}")


if __name__ == "__main__":
    main()
