#!/usr/bin/env python3
"""Wall-time scaling of one training iteration against the known-entry count.

Times train_iteration over a geometric ladder of entry counts at fixed
dimensions and rank, then prints per-doubling ratios; linear cost in the
entry count shows up as ratios near 2.

Example:
    python3 scripts/scaling_benchmark.py --sizes 10000 20000 40000 80000
"""

import argparse
import time

from nlfa.admm import HyperParams, init_state, train_iteration
from nlfa.synthetic import random_sparse


def best_time(nnz, num_rows, num_cols, rank, reps, iters_per_rep) -> float:
    train = random_sparse(num_rows, num_cols, nnz=nnz, seed=nnz, value_range=(1.0, 5.0))
    hp = HyperParams(0.5, 1.0)
    warm = init_state(num_rows, num_cols, rank, seed=1)
    train_iteration(warm, train, hp)  # JIT + cache warm-up
    times = []
    for _ in range(reps):
        state = init_state(num_rows, num_cols, rank, seed=1)
        start = time.perf_counter()
        for _ in range(iters_per_rep):
            train_iteration(state, train, hp)
        times.append((time.perf_counter() - start) / iters_per_rep)
    return min(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[10_000, 20_000, 40_000])
    parser.add_argument("--rows", type=int, default=400)
    parser.add_argument("--cols", type=int, default=400)
    parser.add_argument("--rank", type=int, default=10)
    parser.add_argument("--reps", type=int, default=9)
    parser.add_argument("--iters-per-rep", type=int, default=3)
    args = parser.parse_args()

    timings = []
    for nnz in args.sizes:
        elapsed = best_time(nnz, args.rows, args.cols, args.rank, args.reps, args.iters_per_rep)
        timings.append(elapsed)
        print(f"nnz={nnz:>8}: {elapsed * 1e3:8.3f} ms per iteration")

    for prev_n, n, prev_t, t in zip(args.sizes, args.sizes[1:], timings, timings[1:]):
        print(f"ratio {prev_n} -> {n}: {t / prev_t:.2f} (size factor {n / prev_n:.2f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
