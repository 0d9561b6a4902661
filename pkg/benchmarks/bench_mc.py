#!/usr/bin/env python3
"""Benchmark the compiled Monte Carlo trial kernel against the
pure-python fallback.

Both kernels implement the same ``run_trials`` contract and consume the
per-trial bit streams identically, so besides the timing this doubles as
an equivalence check: the hit counts must match bit for bit.

Usage::

    python3 benchmarks/bench_mc.py [--trials 200000] [--seed 1]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from fracchrom import _mcphases_py
from fracchrom.sampler import _kernel_args, kernel_backend
from fracchrom.two_factor import select_two_factor

from util_graphs import circular_ladder, gp72, k33, petersen

try:
    from fracchrom import _mcphases
except ImportError:
    _mcphases = None

FIXTURES = [
    ("petersen", petersen()),
    ("k33", k33()),
    ("gp72", gp72()),
    ("cl5", circular_ladder(5)),
]


def time_kernel(kernel, args, trials, seed):
    start = time.perf_counter()
    counts, violations = kernel.run_trials(*args[:6], trials, seed, 0, False)
    elapsed = time.perf_counter() - start
    if violations:
        raise SystemExit(f"kernel {kernel.backend_name()} produced "
                         f"{violations} dependent sets")
    return counts, elapsed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    opts = ap.parse_args(argv)

    print(f"active backend: {kernel_backend()}   trials: {opts.trials}")
    if _mcphases is None:
        print("compiled kernel not built; timing the fallback only")
    header = f"{'graph':<10} {'n':>3} {'pure-py s':>10} {'compiled s':>11} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, g in FIXTURES:
        tf = select_two_factor(g)
        args = (g.n,) + _kernel_args(g, tf)
        py_counts, py_t = time_kernel(_mcphases_py, args, opts.trials, opts.seed)
        if _mcphases is None:
            print(f"{name:<10} {g.n:>3} {py_t:>10.3f} {'-':>11} {'-':>8}")
            continue
        c_counts, c_t = time_kernel(_mcphases, args, opts.trials, opts.seed)
        if list(py_counts) != list(c_counts):
            raise SystemExit(f"kernel disagreement on {name}: "
                             f"{py_counts} vs {c_counts}")
        print(f"{name:<10} {g.n:>3} {py_t:>10.3f} {c_t:>11.3f} "
              f"{py_t / c_t:>7.1f}x")


if __name__ == "__main__":
    main()
