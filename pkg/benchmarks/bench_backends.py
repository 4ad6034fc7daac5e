"""Compare the numba kernels with the pure-numpy fallback.

Usage::

    python3 benchmarks/bench_backends.py --scale 14 --reps 3

Prints one row per (algorithm, backend) with the median wall time and the
numba speedup. Both backends must produce identical colorings for the
deterministic algorithms; the script exits non-zero if they do not.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from parcolor import _backend
from parcolor.graph import rmat_graph
from parcolor.greedy import color_sequential
from parcolor.independent_set import MultiHashConfig, jp_color, multihash_color
from parcolor.speculative import Policy, SpecConfig, color_data_driven, color_topology_driven

CASES = {
    "serial": lambda g: color_sequential(g),
    "data/det": lambda g: color_data_driven(g, SpecConfig(policy=Policy.DEGREE, workers=1))[0],
    "topo/det": lambda g: color_topology_driven(g, SpecConfig(policy=Policy.DEGREE, workers=1))[0],
    "data/racy": lambda g: color_data_driven(g, SpecConfig(policy=Policy.DEGREE, workers=1, deterministic=False))[0],
    "jp": lambda g: jp_color(g, seed=1)[0],
    "multihash": lambda g: multihash_color(g, MultiHashConfig(num_hashes=2, seed=1))[0],
}


def timed(fn, g, reps):
    fn(g)  # warm-up: JIT compilation or cache load
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn(g)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=int, default=14, help="R-MAT scale (default 14)")
    ap.add_argument("--avg-degree", type=float, default=10.0, help="mean degree (default 10)")
    ap.add_argument("--reps", type=int, default=3, help="timed repetitions per cell (default 3)")
    ap.add_argument("--seed", type=int, default=1, help="generator seed (default 1)")
    ap.add_argument("--only", nargs="*", choices=sorted(CASES), help="restrict to these algorithms")
    args = ap.parse_args(argv)

    g = rmat_graph(0.45, 0.15, 0.15, 0.25, scale=args.scale, avg_degree=args.avg_degree, seed=args.seed)
    print(f"rmat-g scale={args.scale} n={g.num_vertices} m={g.num_edges} reps={args.reps}")
    print(f"{'algorithm':<12}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}  same")
    failed = False
    for name in args.only or CASES:
        fn = CASES[name]
        res = {}
        for be in ("numba", "numpy"):
            with _backend.using(be):
                res[be] = timed(fn, g, args.reps)
        # every case is deterministic here: racy mode on one worker is
        # sequential greedy under both backends
        same = np.array_equal(res["numba"][1], res["numpy"][1])
        failed |= not same
        tn, tp = res["numba"][0], res["numpy"][0]
        print(f"{name:<12}{tn * 1e3:>12.2f}{tp * 1e3:>12.2f}{tp / tn:>9.1f}x  {same}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
