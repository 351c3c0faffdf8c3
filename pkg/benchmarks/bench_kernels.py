#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

The engine calls these kernels once per instrument (or source) per tick
on small windows, so per-call overhead dominates; the compiled path
mainly wins by skipping numpy dispatch on tiny arrays.

Usage: python benchmarks/bench_kernels.py [--repeat 20000]
"""

import argparse
import time

import numpy as np

from crossrisk.kernels import _fallback

try:
    from crossrisk.kernels import _ext
except ImportError:
    _ext = None


def bench(fn, args, repeat):
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best * 1e6  # microseconds per call


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=20000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    window = rng.normal(size=30)
    big = rng.normal(size=500)
    mat = rng.normal(size=(6, 30))
    vals = rng.normal(size=6)
    weights = rng.random(6) + 0.01
    x, y = rng.normal(size=30), rng.normal(size=30)

    cases = [
        ("sample_std[30]", "sample_std", (window,)),
        ("sample_std[500]", "sample_std", (big,)),
        ("sample_cov[6x30]", "sample_cov", (mat,)),
        ("weighted_mean[6]", "weighted_mean", (vals, weights)),
        ("weighted_sum[6]", "weighted_sum", (vals, weights)),
        ("abs_pearson[30]", "abs_pearson", (x, y)),
    ]

    if _ext is None:
        print("compiled kernels not built; benchmarking fallback only")
    header = f"{'kernel':<20}{'python (us)':>14}{'compiled (us)':>15}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, name, call_args in cases:
        py = bench(getattr(_fallback, name), call_args, args.repeat)
        if _ext is not None:
            cy = bench(getattr(_ext, name), call_args, args.repeat)
            print(f"{label:<20}{py:>14.2f}{cy:>15.2f}{py / cy:>9.1f}x")
        else:
            print(f"{label:<20}{py:>14.2f}{'-':>15}{'-':>10}")


if __name__ == "__main__":
    main()
