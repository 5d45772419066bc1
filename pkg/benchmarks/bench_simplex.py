"""Compare the compiled and numpy simplex kernels.

Times LP relaxations of seeded synthetic models and a full branch-and-bound
solve with each kernel.  Run with ``python3 benchmarks/bench_simplex.py``.
"""

from __future__ import annotations

import argparse
import time

from agilesched.milp import build_model
from agilesched.scengen import SynthSpec, synth_instance
from agilesched.solver import lp as lpmod
from agilesched.solver.bnb import solve_exact
from agilesched.solver.lp import LpProblem, solve_lp


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tasks", type=int, nargs="+", default=[10, 30, 50])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    kernels = ["python"] + (["cython"] if lpmod.BACKEND == "cython" else [])
    if len(kernels) == 1:
        print("compiled kernel not built; timing the numpy kernel only")
    print(f"{'tasks':>5} {'rows':>6} {'cols':>6} {'stage':<6} " + " ".join(f"{k:>10}" for k in kernels) + "   speedup")
    for n in args.tasks:
        model = build_model(synth_instance(SynthSpec(n_tasks=n, task_kind="strip", seed=n)))
        p = LpProblem.from_model(model)
        for stage, job in (
            ("lp", lambda k: solve_lp(p, kernel=lpmod.kernel_module(k))),
            ("bnb", lambda k: solve_exact(model, kernel=lpmod.kernel_module(k))),
        ):
            ts = [best_of(lambda: job(k), args.repeat) for k in kernels]
            speed = f"{ts[0] / ts[1]:8.1f}x" if len(ts) == 2 and ts[1] > 0 else ""
            print(f"{n:>5} {p.m:>6} {p.n:>6} {stage:<6} " + " ".join(f"{t:10.4f}" for t in ts) + f"   {speed}")


if __name__ == "__main__":
    main()
