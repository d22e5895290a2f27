"""Compare the compiled and pure-Python integration kernels.

    python benchmarks/bench_kernel.py [--repeat N]

Each workload is timed with both kernels; outputs are checked for
bit-identical results before the timings are reported.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from mems_pullin import _backend
from mems_pullin import _pykernel as K
from mems_pullin.steady import equilibria

NAN = math.nan


def _trap(lam):
    eq = equilibria(lam)
    return 0.5 * eq.x1**2 - lam / (1 + eq.x1) - 1e-12, eq.x1


def workloads():
    x1 = equilibria(0.13).x1
    e, xt = _trap(0.13)
    base = dict(x0=0.0, y0=0.0, t0=0.0, rtol=1e-10, atol=1e-12, eps_td=1e-6,
                max_steps=10_000_000, h_init=-1.0, h_max=math.inf, t_eval=None,
                trap_energy=NAN, trap_x=NAN, saddle_x=0.0, saddle_radius=-1.0,
                saddle_dwell=50.0, stop_on_turn=False)
    yield "undamped orbit, t = 2000", dict(base, lam=0.1, alpha=0.0, t_max=2000.0, record=K.RECORD_STEPS)
    yield "touchdown, lambda = 0.2", dict(base, lam=0.2, alpha=1.0, t_max=100.0, record=K.RECORD_ENDS)
    yield "near-threshold classification", dict(
        base, lam=0.13, alpha=0.0978154, t_max=2000.0, record=K.RECORD_ENDS,
        trap_energy=e, trap_x=xt, saddle_x=x1, saddle_radius=1e-6)
    yield "sampled orbit, 10^4 points", dict(
        base, lam=0.11, alpha=0.05, t_max=500.0, record=K.RECORD_EVAL, t_eval=np.linspace(0, 500, 10_001))


ORDER = ["lam", "alpha", "x0", "y0", "t0", "t_max", "rtol", "atol", "eps_td", "max_steps",
         "h_init", "h_max", "record", "t_eval", "trap_energy", "trap_x", "saddle_x",
         "saddle_radius", "saddle_dwell", "stop_on_turn"]


def best_of(fn, args, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    opts = ap.parse_args()
    if _backend.compiled_kernel is None:
        raise SystemExit("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
    print(f"{'workload':<32} {'steps':>8} {'python [s]':>11} {'compiled [s]':>13} {'speedup':>8}")
    for name, kw in workloads():
        args = [kw[k] for k in ORDER]
        tp, a = best_of(_backend.python_kernel, args, opts.repeat)
        tc, b = best_of(_backend.compiled_kernel, args, opts.repeat)
        same = all(np.array_equal(u, v) for u, v in zip(a[:3], b[:3])) and a[3] == b[3]
        flag = "" if same else "  (outputs differ!)"
        print(f"{name:<32} {a[7]:>8d} {tp:>11.4f} {tc:>13.5f} {tp / tc:>7.1f}x{flag}")


if __name__ == "__main__":
    main()
