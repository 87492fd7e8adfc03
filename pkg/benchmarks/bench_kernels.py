#!/usr/bin/env python3
"""Compare the numba and numpy coverage kernels.

Times one greedy step's worth of work (every grid point as a candidate
against every event point) and a full greedy run on the same grid, for both
backends. Numba compilation happens in a warm-up call and is excluded.

    python benchmarks/bench_kernels.py --width 50 --height 40 --K 5
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from strgreedy import _kernels
from strgreedy.problems import rectangular_grid


def bench_kernels(width, height, lam, repeat):
    grid = rectangular_grid(width, height, lam, "linear")
    xy = grid.points.astype(np.float64)
    res = _kernels.coverage_residual_np(xy[:3], xy, lam)
    weight = grid.mass * res
    impls = {"numpy": _kernels.coverage_gains_np}
    if _kernels.HAS_NUMBA:
        impls["numba"] = _kernels.coverage_gains_nb
    out = {}
    for name, fn in impls.items():
        fn(xy, xy, weight, lam)  # warm-up / compile
        t = min(timeit.repeat(lambda: fn(xy, xy, weight, lam), number=1, repeat=repeat))
        out[name] = (t, fn(xy, xy, weight, lam))
    if len(out) == 2:
        diff = np.max(np.abs(out["numpy"][1] - out["numba"][1]))
        print(f"max |numpy - numba| gains: {diff:.3e}")
    for name, (t, _) in out.items():
        print(f"coverage_gains[{name:>5}]  {grid.n} x {grid.n}: {t * 1e3:8.2f} ms")
    if len(out) == 2:
        print(f"speedup numba/numpy: {out['numpy'][0] / out['numba'][0]:.2f}x")


GREEDY_SNIPPET = """
import time
from strgreedy import greedy_solve, _kernels
from strgreedy.problems import rectangular_grid, coverage_objective, coverage_constraint
g = rectangular_grid({w}, {h}, {lam}, "linear")
greedy_solve(coverage_objective(g, 2), coverage_constraint(g, 2))
t = time.perf_counter()
tr = greedy_solve(coverage_objective(g, {K}), coverage_constraint(g, {K}))
print(_kernels.BACKEND, round((time.perf_counter() - t) * 1e3, 2), repr(tr.greedy_value))
"""


def bench_greedy(width, height, lam, K):
    # the backend is fixed at import time, so each one runs in a fresh process
    code = GREEDY_SNIPPET.format(w=width, h=height, lam=lam, K=K)
    for disable in ("1", "0"):
        env = dict(os.environ, STRGREEDY_DISABLE_NUMBA=disable)
        line = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                              capture_output=True, text=True).stdout.split()
        print(f"greedy K={K} [{line[0]:>5}]: {float(line[1]):8.2f} ms  f(G)={line[2]}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--width", type=int, default=50)
    ap.add_argument("--height", type=int, default=40)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--K", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    bench_kernels(args.width, args.height, args.lam, args.repeat)
    bench_greedy(args.width, args.height, args.lam, args.K)


if __name__ == "__main__":
    main()
