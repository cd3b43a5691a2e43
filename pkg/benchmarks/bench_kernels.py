"""Benchmark the Bellman sweep kernels (compiled vs numpy fallback).

Runs the full default problem (33^3 x 7 states, 36 actions) for a fixed
number of sweeps with each available backend and reports per-sweep wall
time plus the max value disagreement.

Usage: python benchmarks/bench_kernels.py [--sweeps 5]
"""
import argparse
import time

import numpy as np

from shelfguide.hand_model import synthetic_default_model
from shelfguide.reach_mdp.kernels import available_backends
from shelfguide.reach_mdp.mdp import RewardConfig, build_tensors


def bench(sweep_fn, tensors, n_sweeps):
    values = np.zeros((tensors.imm.shape[1],) + (tensors.n_cells,) * 3)
    sweep_fn(values, tensors)  # warm-up, excluded from timing
    values[:] = 0.0
    t0 = time.perf_counter()
    for _ in range(n_sweeps):
        values, _ = sweep_fn(values, tensors)
        c = tensors.center
        values[:, c, c, c] = 0.0
    elapsed = time.perf_counter() - t0
    return elapsed / n_sweeps, values


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sweeps", type=int, default=5)
    args = parser.parse_args()

    model = synthetic_default_model()
    tensors = build_tensors(model, RewardConfig())
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    results = {}
    for name, fn in backends.items():
        per_sweep, values = bench(fn, tensors, args.sweeps)
        results[name] = (per_sweep, values)
        print(f"{name:>8}: {per_sweep * 1000:8.1f} ms/sweep")
    if len(results) == 2:
        (ta, va), (tb, vb) = results["cython"], results["numpy"]
        print(f"speedup: {tb / ta:.1f}x")
        print(f"max |dV| between backends: {np.abs(va - vb).max():.3g}")


if __name__ == "__main__":
    main()
