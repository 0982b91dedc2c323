#!/usr/bin/env python3
"""Benchmark the JIT diffusion kernel against the numpy/LAPACK fallback.

Times full eigenvalue solves (assembly + factorization + power
iteration) over a batch of random layouts at both fidelity meshes and
checks that the two backends agree.

    python3 benchmarks/bench_kernels.py [--layouts N] [--repeat R]
"""

import argparse
import time

import numpy as np

from latticefold.lattice import random_layout
from latticefold.neutronics import DEFAULT_LIBRARY
from latticefold.neutronics import kernels_numba, kernels_numpy

TIERS = {
    "low  (m=1)": (1, 1e-5, 1e-6),
    "high (m=2)": (2, 1e-7, 1e-12),
}


def bench(kernels, mats, table, m, k_tol, src_tol, repeat):
    best = np.inf
    ks = None
    for _ in range(repeat):
        start = time.perf_counter()
        ks = [
            kernels.solve_two_group(mat, table, m, 1.26, k_tol, src_tol, 20000)[0]
            for mat in mats
        ]
        best = min(best, time.perf_counter() - start)
    return best / len(mats), np.array(ks)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--layouts", type=int, default=20, help="random layouts per batch")
    parser.add_argument("--repeat", type=int, default=3, help="timing repetitions, best taken")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    mats = [
        random_layout(int(rng.integers(8, 40)), rng).grid.astype(np.uint8)
        for _ in range(args.layouts)
    ]
    table = DEFAULT_LIBRARY.as_table()

    # trigger JIT compilation outside the timed region
    kernels_numba.solve_two_group(mats[0], table, 1, 1.26, 1e-5, 1e-6, 20000)
    kernels_numba.solve_two_group(mats[0], table, 2, 1.26, 1e-7, 1e-12, 20000)

    print(f"{args.layouts} layouts per batch, best of {args.repeat} repeats\n")
    print(f"{'tier':<12} {'numba':>12} {'numpy':>12} {'speedup':>9} {'max|dk|':>12}")
    for name, (m, k_tol, src_tol) in TIERS.items():
        t_nb, k_nb = bench(kernels_numba, mats, table, m, k_tol, src_tol, args.repeat)
        t_np, k_np = bench(kernels_numpy, mats, table, m, k_tol, src_tol, args.repeat)
        dk = np.abs(k_nb - k_np).max()
        print(
            f"{name:<12} {t_nb * 1e3:>9.2f} ms {t_np * 1e3:>9.2f} ms "
            f"{t_np / t_nb:>8.1f}x {dk:>12.2e}"
        )


if __name__ == "__main__":
    main()
