"""Compiled kernels against the numpy fallback.

Times the two hot loops directly and through the engines that call them:

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit
from contextlib import contextmanager

import numpy as np

from gieshield import _kernels
from gieshield import scenario as sc
from gieshield._kernels import fallback


@contextmanager
def backend(name: str):
    """Temporarily route kernel calls to one implementation."""
    saved = (_kernels.rk4_interaction, _kernels.shield_decoherence)
    if name == "python":
        _kernels.rk4_interaction = fallback.rk4_interaction
        _kernels.shield_decoherence = fallback.shield_decoherence
    try:
        yield
    finally:
        _kernels.rk4_interaction, _kernels.shield_decoherence = saved


def shield_inputs(modes: int = 64, points: int = 2000):
    rng = np.random.default_rng(0)
    g = rng.normal(size=(modes, 4)) * 1e3
    w = np.sort(rng.uniform(100, 5000, size=modes))
    nbar = rng.uniform(0, 50, size=modes)
    t = np.linspace(0, 0.05, points)
    return g, w, nbar, t


CASES = {
    "shield_decoherence 64x2000": lambda: _kernels.shield_decoherence(*shield_inputs()),
    "recipe trap_revivals_lead": lambda: sc.run(sc.recipe_path("trap_revivals_lead")),
    "recipe markovian_diffusion_gaussian": lambda: sc.run(sc.recipe_path("markovian_diffusion_gaussian")),
    "recipe shield_many_modes_parallel_lead": lambda: sc.run(sc.recipe_path("shield_many_modes_parallel_lead")),
}


def measure(fn, repeat: int) -> float:
    fn()  # warm caches (symbolic expansions, mode roots)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    if _kernels.BACKEND != "cython":
        print("compiled core not available; only the fallback can be timed", file=sys.stderr)
    rows = []
    for name, fn in CASES.items():
        with backend("python"):
            slow = measure(fn, args.repeat)
        fast = measure(fn, args.repeat) if _kernels.BACKEND == "cython" else float("nan")
        rows.append({"case": name, "python_s": slow, "cython_s": fast, "speedup": slow / fast})
    w = max(len(r["case"]) for r in rows)
    print(f"{'case':<{w}}  {'python [s]':>11}  {'cython [s]':>11}  {'speedup':>8}")
    for r in rows:
        print(f"{r['case']:<{w}}  {r['python_s']:>11.4f}  {r['cython_s']:>11.4f}  {r['speedup']:>7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"backend": _kernels.BACKEND, "rows": rows}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
