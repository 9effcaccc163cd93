"""Compiled vs numpy rollout kernel: throughput on planner-sized batches.

Usage::

    python3 benchmarks/bench_kernels.py [--horizon 10] [--repeat 5]

Prints rollouts per second for each backend and batch size, the speed-up,
and the largest relative cost difference between the two backends on the same batch.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from cinewild import kernels
from cinewild.planner import RolloutProblem
from cinewild.plant import SimConfig, forecast_target
from cinewild.presets import PRESETS


def _problem(preset: str, horizon: int, backend: str) -> RolloutProblem:
    sc = PRESETS[preset]()
    seq = sc.sequences[0]
    target = sc.animal.state_at(0.0)
    sim = SimConfig(sc.sim.dt, horizon)
    return RolloutProblem(sc.initial_drone, sc.initial_camera, forecast_target(target, sim.dt, horizon),
                          seq.objective, seq.weights, sc.ethics, sc.limits, sim.dt, sc.sensor, backend)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--preset", choices=sorted(PRESETS), default="e1")
    args = ap.parse_args(argv)

    if not kernels.compiled_available():
        print("compiled kernel not built; only the numpy backend is available", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    py = _problem(args.preset, args.horizon, "python")
    cy = _problem(args.preset, args.horizon, "cython")
    print(f"preset {args.preset}, horizon {args.horizon}, threads {kernels.thread_count()}")
    print(f"{'batch':>7} {'python [roll/s]':>16} {'cython [roll/s]':>16} {'speed-up':>9} {'max rel diff':>13}")
    for batch in (1, 16, 256, 2048):
        U = rng.normal(scale=0.5, size=(batch, args.horizon, 7))
        n_py = max(1, 2000 // batch)
        n_cy = max(1, 20000 // batch)
        t_py = min(timeit.repeat(lambda: py.costs(U), number=n_py, repeat=args.repeat)) / n_py
        t_cy = min(timeit.repeat(lambda: cy.costs(U), number=n_cy, repeat=args.repeat)) / n_cy
        a, b = py.costs(U), cy.costs(U)
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        print(f"{batch:>7} {batch / t_py:>16.0f} {batch / t_cy:>16.0f} {t_py / t_cy:>8.1f}x {diff:>13.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
