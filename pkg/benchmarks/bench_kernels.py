#!/usr/bin/env python3
"""Benchmark the enumeration kernels: numba JIT vs the pure-numpy frontier.

The exhaustive oracle, the compromise brute force and the non-dominated
enumerator all sit on feasible_choices, so this is the path that decides
whether a council-sized exhaustive run takes milliseconds or seconds.

Run:  python benchmarks/bench_kernels.py
      STPLAN_NO_NUMBA=1 python benchmarks/bench_kernels.py   (fallback only)
"""
import time
from importlib import resources

import numpy as np

from stplan import _kernels, brute_force, load_instance, overall_objective


def time_call(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    with resources.as_file(resources.files("stplan") / "data" / "council.json") as p:
        bundle = load_instance(p)
    inst = bundle.instance

    print("=" * 72)
    print("ENUMERATION KERNEL BENCHMARK  (council fixture: 8 facilities, "
          "2 locations, 5 periods)")
    print(f"numba available: {_kernels.USE_NUMBA}")
    print("=" * 72)

    args = (inst.costs, inst.budgets, inst.n_locations, inst.horizon)

    t_np, rows = time_call(lambda: _kernels.feasible_choices(*args, use_numba=False))
    print(f"numpy frontier : {t_np * 1000:8.1f} ms   ({len(rows)} feasible strategies)")

    if _kernels.USE_NUMBA:
        _kernels.feasible_choices(*args, use_numba=True)  # JIT warm-up
        t_nb, rows_nb = time_call(lambda: _kernels.feasible_choices(*args, use_numba=True))
        assert len(rows_nb) == len(rows)
        print(f"numba DFS      : {t_nb * 1000:8.1f} ms   (speedup {t_np / t_nb:5.1f}x)")
    else:
        print("numba DFS      : skipped (STPLAN_NO_NUMBA set or numba missing)")

    obj = overall_objective(inst)
    t_bf, res = time_call(lambda: brute_force(inst, obj), repeats=3)
    print(f"full exhaustive optimum ({'numba' if _kernels.USE_NUMBA else 'numpy'} "
          f"path): {t_bf * 1000:8.1f} ms   value {res.objective_value:.4f}")
    print("=" * 72)


if __name__ == "__main__":
    main()
