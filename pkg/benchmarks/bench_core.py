"""Times the compiled similarity core against the numpy twin.

Usage: python3 benchmarks/bench_core.py [--repeats 5]

Covers the two hot paths the backends implement: masked pair sums (the body
of every double-masked Gram) and streaming column moments (class moments and
centroids). Also times a full mpc Gram through the public API under each
backend. The numpy twin leans on BLAS matmuls, the compiled twin on one fused
pass per pair; which wins depends on shape, so both numbers are printed.
"""

import argparse
import time

import numpy as np

from maskedkrr import KernelSpec, _core_py
from maskedkrr import kernels as kernels_mod
from maskedkrr._backend import backend_name

try:
    from maskedkrr import _core_cy
except ImportError:
    _core_cy = None

SHAPES = [
    (400, 400, 200, "ALL-AML-like: small n, selected dims"),
    (2000, 2000, 21, "ECG-like: many rows, few dims"),
    (500, 500, 1000, "wide block"),
]


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def random_block(rng, n, m, rate=0.3):
    mask = rng.random((n, m)) >= rate
    x = np.where(mask, rng.normal(size=(n, m)), 0.0)
    return np.ascontiguousarray(x), np.ascontiguousarray(mask.astype(np.uint8))


def bench_pair_sums(repeats):
    rng = np.random.default_rng(0)
    print("\nmasked_dot_norms (pair sums over common support)")
    print(f"{'shape':<34}{'numpy':>12}{'compiled':>12}{'ratio':>8}")
    for left, right, m, label in SHAPES:
        xl, ml = random_block(rng, left, m)
        xr, mr = random_block(rng, right, m)
        t_py = best_of(lambda: _core_py.masked_dot_norms(xl, ml, xr, mr), repeats)
        if _core_cy is None:
            print(f"{label:<34}{t_py * 1e3:>10.1f}ms{'-':>12}{'-':>8}")
            continue
        t_cy = best_of(lambda: _core_cy.masked_dot_norms(xl, ml, xr, mr), repeats)
        print(f"{label:<34}{t_py * 1e3:>10.1f}ms{t_cy * 1e3:>10.1f}ms{t_py / t_cy:>7.2f}x")


def bench_column_moments(repeats):
    rng = np.random.default_rng(1)
    print("\nmasked_column_moments (streaming class moments)")
    print(f"{'shape':<34}{'numpy':>12}{'compiled':>12}{'ratio':>8}")
    for n, m, label in ((100_000, 21, "ECG-like"), (72, 7129, "ALL-AML-like")):
        x, p = random_block(rng, n, m)
        t_py = best_of(lambda: _core_py.masked_column_moments(x, p), repeats)
        if _core_cy is None:
            print(f"{label:<34}{t_py * 1e3:>10.1f}ms{'-':>12}{'-':>8}")
            continue
        t_cy = best_of(lambda: _core_cy.masked_column_moments(x, p), repeats)
        print(f"{label:<34}{t_py * 1e3:>10.1f}ms{t_cy * 1e3:>10.1f}ms{t_py / t_cy:>7.2f}x")


def bench_full_gram(repeats):
    rng = np.random.default_rng(2)
    n, m = 1500, 50
    mask = rng.random((n, m)) >= 0.3
    x = np.where(mask, rng.normal(size=(n, m)), 0.0)
    spec = KernelSpec("mpc")
    print(f"\nfull mpc gram through the public API ({n}x{n}, {m} dims)")
    saved = kernels_mod._backend._pair_impl
    try:
        for impl, label in ((_core_py, "numpy"), (_core_cy, "compiled")):
            if impl is None:
                continue
            kernels_mod._backend._pair_impl = impl
            t = best_of(lambda: kernels_mod.gram(x, mask, x, mask, spec), repeats)
            print(f"  {label:<10}{t * 1e3:>10.1f}ms")
    finally:
        kernels_mod._backend._pair_impl = saved


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    print(f"active backend: {backend_name}"
          + ("" if _core_cy else " (compiled core not built; showing numpy only)"))
    bench_pair_sums(args.repeats)
    bench_column_moments(args.repeats)
    bench_full_gram(args.repeats)


if __name__ == "__main__":
    main()
