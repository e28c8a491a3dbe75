#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Usage: python3 benchmarks/bench_kernels.py [--max-log-n 22]
"""

import argparse
import time

import numpy as np

from ghdlab import kernels
from ghdlab.rng import make_rng


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--max-log-n", type=int, default=22)
    args = parser.parse_args()

    impls = kernels.implementations()
    names = [impl.IMPLEMENTATION for impl in impls]
    print(f"available implementations: {', '.join(names)}")
    rng = make_rng(0)

    print(f"\n{'kernel':<28}{'size':>12}" + "".join(f"{n:>14}" for n in names) + f"{'speedup':>10}")
    for log_n in range(16, args.max_log_n + 1, 2):
        size = 1 << log_n
        values = rng.integers(0, 2**40, size=size).astype(np.int64)
        times = []
        for impl in impls:
            a = values.copy()
            times.append(time_call(impl.wht_inplace, a))
        ratio = times[0] / times[-1] if len(times) > 1 else 1.0
        print(
            f"{'wht_inplace':<28}{f'2^{log_n}':>12}"
            + "".join(f"{t * 1e3:>12.1f}ms" for t in times)
            + f"{ratio:>9.1f}x"
        )

        times = []
        for impl in impls:
            times.append(time_call(impl.index_popcount_hist, values, log_n))
        ratio = times[0] / times[-1] if len(times) > 1 else 1.0
        print(
            f"{'index_popcount_hist':<28}{f'2^{log_n}':>12}"
            + "".join(f"{t * 1e3:>12.1f}ms" for t in times)
            + f"{ratio:>9.1f}x"
        )

    for size_a, size_b in [(300, 300), (2000, 2000)]:
        a = rng.integers(0, 1 << 24, size=size_a).astype(np.uint64)
        b = rng.integers(0, 1 << 24, size=size_b).astype(np.uint64)
        times = [time_call(impl.pairwise_distance_hist, a, b, 24) for impl in impls]
        ratio = times[0] / times[-1] if len(times) > 1 else 1.0
        print(
            f"{'pairwise_distance_hist':<28}{f'{size_a}x{size_b}':>12}"
            + "".join(f"{t * 1e3:>12.1f}ms" for t in times)
            + f"{ratio:>9.1f}x"
        )


if __name__ == "__main__":
    main()
