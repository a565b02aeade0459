"""Time the numeric kernels with numba enabled and with the numpy fallback.

Run ``python benchmarks/bench_kernels.py``. The JIT timings come from this
process; the fallback timings come from a child process started with
``CCLIQUE_DISABLE_JIT=1``, since the flag is read once at import.
Each kernel is warmed up once so compilation time is excluded.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np


def _cases(n: int):
    from cclique import InstanceSpec, generate, threshold_graph
    from cclique import kernels

    inst = generate(InstanceSpec("euclidean", n, seed=0, dim=2))
    m = inst.metric
    g = threshold_graph(m, 0.05)
    every = np.ones(n, dtype=bool)
    src = np.zeros(n, dtype=bool)
    src[::17] = True
    order = np.argsort(m.dist[g.eu, g.ev], kind="stable")
    u, v = g.eu[order], g.ev[order]
    return {
        "pairwise_euclidean": lambda: kernels.pairwise_euclidean(m.points),
        "greedy_mis": lambda: kernels.greedy_mis(g.indptr, g.indices, every),
        "local_min_mis": lambda: kernels.local_min_mis(g.indptr, g.indices, every),
        "multi_source_bfs": lambda: kernels.multi_source_bfs(g.indptr, g.indices, src),
        "kruskal_select": lambda: kernels.kruskal_select(n, u, v),
        "union_find_labels": lambda: kernels.union_find_labels(n, u, v),
        "prim_dense": lambda: kernels.prim_dense(m.dist),
        "mp_radii": lambda: kernels.mp_radii(m.dist, inst.costs),
    }


def measure(n: int, repeat: int) -> dict[str, float]:
    """Best-of-``repeat`` seconds per kernel call in the current process."""
    out = {}
    for name, fn in _cases(n).items():
        fn()
        out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
    return out


def _child(n: int, repeat: int) -> dict[str, float]:
    env = dict(os.environ, CCLIQUE_DISABLE_JIT="1")
    cmd = [sys.executable, __file__, "--n", str(n), "--repeat", str(repeat), "--json"]
    done = subprocess.run(cmd, env=env, check=True, capture_output=True, text=True)
    return json.loads(done.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print this process's timings as JSON and exit")
    args = ap.parse_args(argv)

    from cclique import _jit

    if args.json:
        print(json.dumps(measure(args.n, args.repeat)))
        return 0
    if not _jit.HAS_NUMBA:
        print("numba is unavailable or disabled here; only fallback timings are meaningful", file=sys.stderr)
    fast = measure(args.n, args.repeat)
    slow = _child(args.n, args.repeat)
    print(f"n={args.n}, best of {args.repeat}")
    print(f"{'kernel':<20} {'jit ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for name in fast:
        a, b = fast[name] * 1e3, slow[name] * 1e3
        print(f"{name:<20} {a:>10.3f} {b:>10.3f} {b / a if a > 0 else float('inf'):>8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
