#!/usr/bin/env python
"""Compare the numba kernels against their numpy twins.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --states 50 200 --depths 16 32 --json out.json

The numpy versions are what runs when PFTL_DISABLE_NUMBA=1 is set.
"""

import argparse
import json
import statistics
import time

import numpy as np

from pftl import _kernels
from pftl.model import Ctmc, Dtmc
from pftl.numerical import _vtable_base, state_classes


def timed(fn, repeats):
    fn()  # compile / warm caches
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def dense_dtmc(rng, n):
    mat = rng.random((n, n)) + 0.05
    mat /= mat.sum(axis=1, keepdims=True)
    return Dtmc.from_dense(mat)


def bench_count_step(rng, n, depth, repeats):
    d = dense_dtmc(rng, n)
    cls = state_classes(rng.random(n) < 0.5, rng.random(n) < 0.7)
    active = np.ones(n, dtype=bool)

    def run(step):
        def go():
            layer = _vtable_base(cls)
            for _ in range(depth):
                layer = step(d.indptr, d.indices, d.values, cls, active, layer)
        return go

    return {"kernel": "count_step", "states": n, "depth": depth,
            "numpy": timed(run(_kernels.count_step_numpy), repeats),
            "numba": timed(run(_kernels.count_step_numba), repeats)}


def bench_walk_timed(rng, n, horizon, repeats):
    gen = rng.uniform(0.5, 2.0, (n, n))
    np.fill_diagonal(gen, 0.0)
    np.fill_diagonal(gen, -gen.sum(axis=1))
    c = Ctmc.from_generator(gen)
    cap = int(horizon * 3 * gen.max()) + 64
    uc, ut = rng.random(cap), 1.0 - rng.random(cap)

    def run(walk):
        return lambda: walk(c.indptr, c.indices, c.cumulative, c.exit_rates, 0, 0.0, float(horizon), uc, ut)

    return {"kernel": "walk_timed", "states": n, "horizon": horizon,
            "numpy": timed(run(_kernels.walk_timed_numpy), repeats),
            "numba": timed(run(_kernels.walk_timed_numba), repeats)}


def bench_walk_discrete(rng, n, steps, repeats):
    d = dense_dtmc(rng, n)
    u = rng.random(steps)

    def run(walk):
        return lambda: walk(d.indptr, d.indices, d.cumulative, 0, u)

    return {"kernel": "walk_discrete", "states": n, "steps": steps,
            "numpy": timed(run(_kernels.walk_discrete_numpy), repeats),
            "numba": timed(run(_kernels.walk_discrete_numba), repeats)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, nargs="+", default=[20, 100, 300])
    ap.add_argument("--depths", type=int, nargs="+", default=[16, 32])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args()

    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    rows = []
    for n in args.states:
        for depth in args.depths:
            rows.append(bench_count_step(rng, n, depth, args.repeats))
        rows.append(bench_walk_timed(rng, n, 200.0, args.repeats))
        rows.append(bench_walk_discrete(rng, n, 10_000, args.repeats))

    print(f"{'kernel':<14}{'size':>28}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for r in rows:
        size = ", ".join(f"{k}={r[k]}" for k in r if k not in ("kernel", "numpy", "numba"))
        print(f"{r['kernel']:<14}{size:>28}{r['numpy'] * 1e3:12.3f}{r['numba'] * 1e3:12.3f}"
              f"{r['numpy'] / r['numba']:9.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
