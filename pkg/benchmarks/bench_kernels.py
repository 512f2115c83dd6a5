#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the pure-Python twin.

The hot loop is the exhaustive tipping-set enumeration (2^p subsets,
each needing an argmax over the augmented space), plus the per-space
utility sums it is built from. Run after `pip install -e .`:

    python benchmarks/bench_kernels.py [--max-pool 16] [--repeats 3]
"""

import argparse
import time

import numpy as np

from ctxchoice import sample_matrix
from ctxchoice._kernels import pure

try:
    from ctxchoice._kernels import _ckern as compiled
except ImportError:
    compiled = None


def _bench(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_tipping(max_pool: int, repeats: int) -> None:
    print(f"{'pool':>5} {'mode':>5} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for p in range(8, max_pool + 1, 2):
        n = p + 4
        m = sample_matrix(n, seed=p, sparsity=0.3)
        base = np.arange(2, dtype=np.int64)
        pool = np.arange(2, 2 + p, dtype=np.int64)
        for full in (False, True):
            mode = "full" if full else "gap"
            t_pure, r_pure = _bench(
                pure.minimal_tipping_masks, m.entries, 0, 1, base, pool, full,
                repeats=repeats,
            )
            if compiled is None:
                print(f"{p:>5} {mode:>5} {t_pure * 1e3:>10.1f}ms {'n/a':>12} {'':>9}")
                continue
            t_comp, r_comp = _bench(
                compiled.minimal_tipping_masks, m.entries, 0, 1, base, pool, full,
                repeats=repeats,
            )
            assert r_pure == r_comp, "backends disagree"
            print(
                f"{p:>5} {mode:>5} {t_pure * 1e3:>10.1f}ms {t_comp * 1e3:>10.1f}ms "
                f"{t_pure / t_comp:>8.1f}x"
            )


def bench_utilities(repeats: int) -> None:
    print(f"\n{'n':>5} {'calls':>7} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for n in (8, 16, 24):
        m = sample_matrix(n, seed=n, sparsity=0.3)
        idx = np.arange(n, dtype=np.int64)
        calls = 20_000

        def run_many(fn):
            def inner():
                for _ in range(calls):
                    fn(m.entries, idx)

            return inner

        t_pure, _ = _bench(run_many(pure.space_utilities), repeats=repeats)
        if compiled is None:
            print(f"{n:>5} {calls:>7} {t_pure * 1e3:>10.1f}ms {'n/a':>12}")
            continue
        t_comp, _ = _bench(run_many(compiled.space_utilities), repeats=repeats)
        print(
            f"{n:>5} {calls:>7} {t_pure * 1e3:>10.1f}ms {t_comp * 1e3:>10.1f}ms "
            f"{t_pure / t_comp:>8.1f}x"
        )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-pool", type=int, default=16)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if compiled is None:
        print("compiled kernels not available; timing the pure backend only\n")
    print("tipping-set enumeration (2^pool subsets):")
    bench_tipping(args.max_pool, args.repeats)
    bench_utilities(args.repeats)


if __name__ == "__main__":
    main()
