"""Hot numeric kernels.

Every kernel exists twice: a numba-compiled loop and a numpy (or plain
Python) fallback. Which one the public name binds to is decided by
``cclique._jit`` at import time. Both paths produce identical results;
``tests/test_kernels.py`` checks that and ``benchmarks/bench_kernels.py``
times them against each other.
"""
from __future__ import annotations

import numpy as np

from ._jit import HAS_NUMBA, jit

__all__ = [
    "HAS_NUMBA",
    "pairwise_euclidean",
    "greedy_mis",
    "local_min_mis",
    "multi_source_bfs",
    "kruskal_select",
    "prim_dense",
    "union_find_labels",
    "mp_radii",
]


# ---------------------------------------------------------------- distances

def _pairwise_euclidean_loop(points):
    n, dim = points.shape
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(dim):
                diff = points[i, k] - points[j, k]
                s += diff * diff
            d = np.sqrt(s)
            out[i, j] = d
            out[j, i] = d
    return out


def _pairwise_euclidean_np(points):
    n, dim = points.shape
    s = np.zeros((n, n), dtype=np.float64)
    for k in range(dim):
        diff = points[:, k, None] - points[None, :, k]
        s += diff * diff
    out = np.sqrt(s)
    np.fill_diagonal(out, 0.0)
    return out


# ---------------------------------------------------------------------- MIS

def _greedy_mis_loop(indptr, indices, active):
    n = active.shape[0]
    mis = np.zeros(n, dtype=np.bool_)
    blocked = ~active
    for v in range(n):
        if blocked[v]:
            continue
        mis[v] = True
        blocked[v] = True
        for e in range(indptr[v], indptr[v + 1]):
            blocked[indices[e]] = True
    return mis


def _local_min_mis_loop(indptr, indices, active):
    n = active.shape[0]
    mis = np.zeros(n, dtype=np.bool_)
    undecided = active.copy()
    rounds = 0
    remaining = 0
    for v in range(n):
        if undecided[v]:
            remaining += 1
    join = np.zeros(n, dtype=np.bool_)
    while remaining > 0:
        rounds += 1
        for v in range(n):
            join[v] = False
            if not undecided[v]:
                continue
            ok = True
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if undecided[w] and w < v:
                    ok = False
                    break
            join[v] = ok
        for v in range(n):
            if join[v]:
                mis[v] = True
                if undecided[v]:
                    undecided[v] = False
                    remaining -= 1
                for e in range(indptr[v], indptr[v + 1]):
                    w = indices[e]
                    if undecided[w]:
                        undecided[w] = False
                        remaining -= 1
    return mis, rounds


def _local_min_mis_np(indptr, indices, active):
    n = active.shape[0]
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    cols = indices.astype(np.int64)
    mis = np.zeros(n, dtype=bool)
    undecided = active.copy()
    rounds = 0
    sentinel = np.int64(n)
    while undecided.any():
        rounds += 1
        live = undecided[rows] & undecided[cols]
        nbr_min = np.full(n, sentinel, dtype=np.int64)
        np.minimum.at(nbr_min, rows[live], cols[live])
        join = undecided & (np.arange(n) < nbr_min)
        mis |= join
        hit = np.zeros(n, dtype=bool)
        hit[cols[join[rows]]] = True
        undecided &= ~(join | hit)
    return mis, rounds


# ---------------------------------------------------------------------- BFS

def _bfs_loop(indptr, indices, sources, active):
    n = sources.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for v in range(n):
        if sources[v] and active[v]:
            dist[v] = 0
            queue[tail] = v
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if active[w] and dist[w] < 0:
                dist[w] = dist[v] + 1
                queue[tail] = w
                tail += 1
    return dist


def _bfs_np(indptr, indices, sources, active):
    n = sources.shape[0]
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    cols = indices.astype(np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    frontier = sources & active
    dist[frontier] = 0
    level = 0
    while frontier.any():
        level += 1
        reach = np.zeros(n, dtype=bool)
        reach[cols[frontier[rows]]] = True
        frontier = reach & active & (dist < 0)
        dist[frontier] = level
    return dist


# ---------------------------------------------------------------- spanning

def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


_find_uf = jit(_find)


def _kruskal_loop(n, u, v):
    parent = np.arange(n, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int64)
    keep = np.zeros(u.shape[0], dtype=np.bool_)
    joined = 0
    for e in range(u.shape[0]):
        a = _find_uf(parent, u[e])
        b = _find_uf(parent, v[e])
        if a == b:
            continue
        if rank[a] < rank[b]:
            a, b = b, a
        parent[b] = a
        if rank[a] == rank[b]:
            rank[a] += 1
        keep[e] = True
        joined += 1
        if joined == n - 1:
            break
    return keep


def _uf_labels_loop(n, u, v):
    parent = np.arange(n, dtype=np.int64)
    for e in range(u.shape[0]):
        a = _find_uf(parent, u[e])
        b = _find_uf(parent, v[e])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    out = np.empty(n, dtype=np.int64)
    for x in range(n):
        out[x] = _find_uf(parent, x)
    return out


def _prim_loop(dist):
    n = dist.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    key = np.full(n, np.inf)
    done = np.zeros(n, dtype=np.bool_)
    if n == 0:
        return parent
    key[0] = 0.0
    for _ in range(n):
        best = -1
        bk = np.inf
        for x in range(n):
            if not done[x] and key[x] < bk:
                bk = key[x]
                best = x
        if best < 0:
            break
        done[best] = True
        for x in range(n):
            if not done[x] and dist[best, x] < key[x]:
                key[x] = dist[best, x]
                parent[x] = best
    return parent


def _prim_np(dist):
    n = dist.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return parent
    key = np.full(n, np.inf)
    done = np.zeros(n, dtype=bool)
    key[0] = 0.0
    for _ in range(n):
        masked = np.where(done, np.inf, key)
        best = int(np.argmin(masked))
        if not np.isfinite(masked[best]):
            break
        done[best] = True
        better = (~done) & (dist[best] < key)
        key[better] = dist[best][better]
        parent[better] = best
    return parent


# ------------------------------------------------------------ facility radii

def _mp_radii_loop(dist, costs):
    n = dist.shape[0]
    out = np.empty(n, dtype=np.float64)
    for v in range(n):
        # the radius never exceeds the opening cost, so farther nodes cannot contribute
        row = np.sort(dist[v][dist[v] <= costs[v]])
        m = row.size
        prefix = 0.0
        r = 0.0
        for k in range(1, m + 1):
            prefix += row[k - 1]
            r = (costs[v] + prefix) / k
            if k == m or r <= row[k]:
                break
        out[v] = r
    return out


def _mp_radii_np(dist, costs):
    n = dist.shape[0]
    rows = np.sort(dist, axis=1)
    prefix = np.cumsum(rows, axis=1)
    k = np.arange(1, n + 1, dtype=np.float64)
    cand = (costs[:, None] + prefix) / k[None, :]
    ok = np.ones_like(cand, dtype=bool)
    ok[:, :-1] = cand[:, :-1] <= rows[:, 1:]
    first = np.argmax(ok, axis=1)
    return cand[np.arange(n), first]


# ------------------------------------------------------------------ binding

if HAS_NUMBA:
    _pairwise_impl = jit(_pairwise_euclidean_loop)
    _greedy_impl = jit(_greedy_mis_loop)
    _local_min_impl = jit(_local_min_mis_loop)
    _bfs_impl = jit(_bfs_loop)
    _kruskal_impl = jit(_kruskal_loop)
    _uf_impl = jit(_uf_labels_loop)
    _prim_impl = jit(_prim_loop)
    # numpy's batched row sort beats a compiled per-row sort (see benchmarks/bench_kernels.py)
    _radii_impl = _mp_radii_np
else:
    _pairwise_impl = _pairwise_euclidean_np
    _local_min_impl = _local_min_mis_np
    _greedy_impl = None
    _bfs_impl = _bfs_np
    _kruskal_impl = _kruskal_loop
    _uf_impl = _uf_labels_loop
    _prim_impl = _prim_np
    _radii_impl = _mp_radii_np


def pairwise_euclidean(points: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix of an ``(n, dim)`` point array."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array")
    return _pairwise_impl(pts)


def greedy_mis(indptr: np.ndarray, indices: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Greedy-by-ascending-id maximal independent set of the active vertices.

    The fallback reaches the same set through synchronous local-minimum
    rounds, which always yields the lexicographically first MIS.
    """
    act = np.ascontiguousarray(active, dtype=np.bool_)
    if _greedy_impl is None:
        return _local_min_mis_np(indptr, indices, act)[0]
    return _greedy_impl(indptr, indices, act.copy())


def local_min_mis(indptr, indices, active):
    """``(mis, rounds)``: each round every undecided vertex whose id is the
    smallest among its undecided neighbours joins, and its neighbours retire."""
    act = np.ascontiguousarray(active, dtype=np.bool_)
    mis, rounds = _local_min_impl(indptr, indices, act)
    return mis, int(rounds)


def multi_source_bfs(indptr, indices, sources, active=None) -> np.ndarray:
    """Hop distance from the nearest source; ``-1`` marks unreachable vertices."""
    src = np.ascontiguousarray(sources, dtype=np.bool_)
    act = np.ones_like(src) if active is None else np.ascontiguousarray(active, dtype=np.bool_)
    return _bfs_impl(indptr, indices, src, act)


def kruskal_select(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Mask of the edges kept by Kruskal; edges must already be sorted."""
    return _kruskal_impl(n, np.ascontiguousarray(u, dtype=np.int64), np.ascontiguousarray(v, dtype=np.int64))


def union_find_labels(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Component label (smallest member id) per vertex."""
    return _uf_impl(n, np.ascontiguousarray(u, dtype=np.int64), np.ascontiguousarray(v, dtype=np.int64))


def prim_dense(dist: np.ndarray) -> np.ndarray:
    """Parent array of a minimum spanning tree of a dense distance matrix."""
    return _prim_impl(np.ascontiguousarray(dist, dtype=np.float64))


def mp_radii(dist: np.ndarray, costs: np.ndarray) -> np.ndarray:
    """Per-node radius r solving sum over d(v,u) <= r of (r - d(v,u)) = f_v."""
    return _radii_impl(np.ascontiguousarray(dist, dtype=np.float64), np.ascontiguousarray(costs, dtype=np.float64))
