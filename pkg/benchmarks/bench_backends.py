#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the three projection/prox kernels on solver-typical vector sizes and an
end-to-end solver run on the game instance under each backend.

Run:  python benchmarks/bench_backends.py
"""

import time

import numpy as np

from pdcomp import _core
from pdcomp.instances import default_game
from pdcomp.schedules import ScheduleParams, Variant, make_schedule
from pdcomp import solver


def time_kernel(fn, args_list, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels():
    rng = np.random.default_rng(0)
    backends = [("pure-python", _core.kernels_py)]
    if _core.HAVE_EXTENSION:
        backends.append(("compiled", _core._kernels))
    print(f"{'kernel':20s} {'n':>6s} " + " ".join(f"{name:>14s}" for name, _ in backends))
    for n in (3, 10, 50, 500):
        vecs = [np.ascontiguousarray(rng.standard_normal(n)) for _ in range(2000)]
        rows = {
            "project_simplex": [(v,) for v in vecs],
            "soft_threshold": [(v, 0.3) for v in vecs],
            "project_soc": [(v,) for v in vecs] if n >= 2 else None,
        }
        for kernel, args_list in rows.items():
            if args_list is None:
                continue
            cells = []
            for _, impl in backends:
                secs = time_kernel(getattr(impl, kernel), args_list)
                cells.append(f"{secs / len(args_list) * 1e6:11.2f} us")
            print(f"{kernel:20s} {n:6d} " + " ".join(cells))


def bench_solver(iters=20000):
    prob = default_game()
    params = ScheduleParams(variant=Variant.SEMI_CVX)
    names = ["pure-python"] + (["compiled"] if _core.HAVE_EXTENSION else [])
    print(f"\nend-to-end: {iters} iterations on the game instance")
    for name in names:
        _core.use_backend(name)
        sched = make_schedule(prob, params, *prob.start)
        state = solver.init_state(prob, *prob.start)
        t0 = time.perf_counter()
        for k in range(iters):
            solver.step(prob, sched.at(k), state)
        secs = time.perf_counter() - t0
        print(f"  {name:12s} {secs:8.3f} s   ({secs / iters * 1e6:.1f} us/iter)")
    _core.use_backend("compiled" if _core.HAVE_EXTENSION else "pure-python")


if __name__ == "__main__":
    print(f"extension available: {_core.HAVE_EXTENSION}")
    bench_kernels()
    bench_solver()
