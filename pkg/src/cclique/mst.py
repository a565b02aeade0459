"""Constant-factor MST approximation through a sparse spanning subgraph.

Pairs not longer than ``d_m / n^3`` are light. Light connectivity survives
in the edges within ``2 d_m / n^2`` of an MIS of the ``d_m / n^2`` threshold
graph. Heavy pairs are covered layer by layer: at radius ``r_i`` (growing by
a factor ``c1`` up to the diameter) an MIS ``V_i`` of the threshold graph
keeps the pairs of ``V_i`` within ``c2 * r_i``. All kept pairs fit in
``O(n)`` words, so one node gathers them, runs Kruskal and broadcasts the
tree back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import CUT_CHECK_MAX_N
from .engine import Clique, RoutingBatch
from .errors import BudgetInfeasible
from .metric import MetricSpace
from .mis import low_dimensional_mis, sample_count
from .oracles import components, exact_mst
from .results import TreeResult, VerificationReport

__all__ = [
    "Layer",
    "Sparsifier",
    "ParallelPlan",
    "layer_count",
    "split_edges",
    "light_sparsify",
    "heavy_sparsify",
    "schedule_parallel_mis",
    "mst_sparse",
    "mst_approximation",
    "check_light_connectivity",
    "check_cut_preservation",
    "check_layer_structure",
    "layer_degree_bound",
]


@dataclass
class Layer:
    radius: float
    members: np.ndarray  # V_i as a boolean mask
    u: np.ndarray
    v: np.ndarray


@dataclass
class Sparsifier:
    n: int
    d_m: float
    c1: float
    c2: float
    h: int
    light_u: np.ndarray
    light_v: np.ndarray
    layers: list[Layer] = field(default_factory=list)

    @property
    def r0(self) -> float:
        return self.d_m / self.c1**self.h

    @property
    def delta(self) -> int:
        """Layer offset at which two kept neighbours of a vertex become adjacent."""
        return math.ceil(math.log2(2 * self.c2) / math.log2(self.c1))

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct pairs of the whole sparsifier, ``u < v``, sorted."""
        us = [self.light_u] + [ly.u for ly in self.layers]
        vs = [self.light_v] + [ly.v for ly in self.layers]
        u = np.concatenate(us).astype(np.int64)
        v = np.concatenate(vs).astype(np.int64)
        key = np.unique(np.minimum(u, v) * self.n + np.maximum(u, v))
        return key // max(self.n, 1), key % max(self.n, 1)

    @property
    def size(self) -> int:
        return int(self.edge_arrays()[0].size)


@dataclass
class ParallelPlan:
    """Receiver offsets for concurrent MIS runs and how their rounds are charged."""

    offsets: list[int]
    charge: str
    receivers_needed: int
    membership_words: int
    feasible: bool


def layer_count(n: int, c1: float) -> int:
    return math.ceil(3 * math.log2(n) / math.log2(c1)) if n > 1 else 0


def _pairs_within(metric: MetricSpace, rows: np.ndarray, cols_mask: np.ndarray, radius: float):
    """Pairs ``(a, b)``, ``a`` in ``rows``, ``b`` in ``cols_mask``, ``a != b``, ``d <= radius``."""
    cols = np.flatnonzero(cols_mask)
    if rows.size == 0 or cols.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    hit = metric.dist[np.ix_(rows, cols)] <= radius
    a, b = np.nonzero(hit)
    a, b = rows[a], cols[b]
    keep = a != b
    return a[keep], b[keep]


# --------------------------------------------------------------- pipeline

def split_edges(metric: MetricSpace, clique: Clique):
    """``(light_u, light_v, d_m)``: the diameter costs one broadcast of per-node maxima."""
    n = metric.n
    if n < 2:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), 0.0
    row_max = metric.dist.max(axis=1)
    clique.broadcast_array(np.arange(n), row_max)
    d_m = float(row_max.max())
    u, v = np.nonzero(np.triu(metric.dist <= d_m / n**3, 1))
    return u, v, d_m


def light_sparsify(metric: MetricSpace, d_m: float, clique: Clique):
    """``(light_hat_u, light_hat_v, S)`` from an MIS ``S`` of the ``d_m/n^2`` threshold graph."""
    n = metric.n
    res = low_dimensional_mis(metric, d_m / n**2, clique)
    a, b = _pairs_within(metric, np.flatnonzero(res.members), np.ones(n, dtype=bool), 2 * d_m / n**2)
    key = np.unique(np.minimum(a, b) * n + np.maximum(a, b))
    return key // n, key % n, res.members


def schedule_parallel_mis(n: int, runs: int, n_active: int | None = None, word_bits: int | None = None) -> ParallelPlan:
    """Give each of ``runs`` concurrent MIS executions its own sample receivers.

    Run ``i`` gathers its samples at nodes ``i*K .. i*K+K-1``; all
    ``runs*K`` receivers must be distinct, so ``runs*K <= n``. Membership
    bits of all runs ride in one ``runs``-bit string per node, i.e.
    ``ceil(runs / word_bits)`` words.
    """
    K = sample_count(n if n_active is None else n_active)
    need = runs * K
    bits = word_bits or max(1, math.ceil(math.log2(max(n, 2))))
    if need > n:
        raise BudgetInfeasible(f"{runs} parallel runs need {need} distinct receivers, only {n} nodes")
    return ParallelPlan([i * K for i in range(runs)], "max", need, math.ceil(runs / bits) if runs else 0, True)


def heavy_sparsify(metric: MetricSpace, d_m: float, clique: Clique) -> tuple[list[Layer], ParallelPlan]:
    """All layers as one parallel block; rounds charged per the plan."""
    cfg = clique.config
    n = metric.n
    h = layer_count(n, cfg.c1)
    try:
        plan = schedule_parallel_mis(n, h, word_bits=clique.bits)
        plan.charge = cfg.parallel_charge
    except BudgetInfeasible:
        # receivers would collide, so the layers are charged back to back
        K = sample_count(n)
        plan = ParallelPlan([0] * h, "sum", h * K, h, False)
    layers, ledgers = [], []
    for i in range(1, h + 1):
        r_i = d_m * cfg.c1 ** (i - h)
        sub = clique.fork(f"layer{i}")
        res = low_dimensional_mis(metric, r_i, sub, receiver_offset=plan.offsets[i - 1])
        V = res.members
        ids = np.flatnonzero(V)
        a, b = _pairs_within(metric, ids, V, cfg.c2 * r_i)
        keep = a < b
        layers.append(Layer(r_i, V, a[keep], b[keep]))
        ledgers.append(sub.ledger)
    clique.absorb_parallel(ledgers, plan.charge)
    return layers, plan


def mst_sparse(n: int, u, v, w, clique: Clique) -> TreeResult:
    """Gather the sparse edge set at node 0, run Kruskal, send the tree back.

    Each edge travels as one message ``(other endpoint, weight)`` from its
    lower endpoint. Spreading the tree takes ``ceil(|T|/n) + 1`` rounds:
    node 0 hands edge ``j`` to node ``j mod n``, which then broadcasts it.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    src = np.minimum(u, v)
    payload = np.column_stack([np.maximum(u, v).astype(np.float64), w])
    clique.route_bulk(RoutingBatch(src, np.zeros(src.size, dtype=np.int64), payload),
                      max_invocations=clique.config.sparse_budget)
    tree = exact_mst(n, u, v, w)
    k = len(tree)
    spread = math.ceil(k / n) + 1 if n > 1 else 0
    clique.charge(spread, k + k * (n - 1))
    tree.ledger = clique.ledger
    return tree


def mst_approximation(metric: MetricSpace, clique: Clique) -> tuple[TreeResult, Sparsifier, ParallelPlan | None]:
    """Full pipeline; phases ``split``, ``light``, ``heavy``, ``sparse``."""
    cfg = clique.config
    n = metric.n
    if n < 2:
        empty = np.zeros(0, dtype=np.int64)
        return TreeResult(n, empty, empty, np.zeros(0), True, clique.ledger), Sparsifier(
            n, 0.0, cfg.c1, cfg.c2, 0, empty, empty), None
    with clique.phase("split"):
        _, _, d_m = split_edges(metric, clique)
    with clique.phase("light"):
        lu, lv, _ = light_sparsify(metric, d_m, clique)
    with clique.phase("heavy"):
        layers, plan = heavy_sparsify(metric, d_m, clique)
    sp = Sparsifier(n, d_m, cfg.c1, cfg.c2, layer_count(n, cfg.c1), lu, lv, layers)
    eu, ev = sp.edge_arrays()
    with clique.phase("sparse"):
        tree = mst_sparse(n, eu, ev, metric.dist[eu, ev], clique)
    return tree, sp, plan


# ----------------------------------------------------------------- checks

def check_light_connectivity(metric: MetricSpace, sp: Sparsifier) -> VerificationReport:
    """Every light pair is connected by kept light edges."""
    n = metric.n
    if n < 2:
        return VerificationReport("light-connectivity", True)
    u, v = np.nonzero(np.triu(metric.dist <= sp.d_m / n**3, 1))
    labels = components(n, sp.light_u, sp.light_v)
    bad = np.flatnonzero(labels[u] != labels[v])
    if bad.size:
        return VerificationReport("light-connectivity", False, [int(u[bad[0]]), int(v[bad[0]])])
    return VerificationReport("light-connectivity", True)


def _euler_tour(n: int, tu: np.ndarray, tv: np.ndarray):
    """Entry/exit times and parents of the tree rooted at 0."""
    adj = [[] for _ in range(n)]
    for a, b in zip(tu.tolist(), tv.tolist()):
        adj[a].append(b)
        adj[b].append(a)
    tin = np.full(n, -1, dtype=np.int64)
    tout = np.zeros(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    clock = 0
    for root in range(n):
        if tin[root] >= 0:
            continue
        stack = [(root, 0)]
        tin[root] = clock
        clock += 1
        while stack:
            x, i = stack.pop()
            if i < len(adj[x]):
                stack.append((x, i + 1))
                y = adj[x][i]
                if tin[y] < 0:
                    parent[y] = x
                    tin[y] = clock
                    clock += 1
                    stack.append((y, 0))
            else:
                tout[x] = clock - 1
    return tin, tout, parent


def check_cut_preservation(metric: MetricSpace, sp: Sparsifier, tree: TreeResult | None = None) -> VerificationReport:
    """For each heavy edge of the exact MST, some kept pair crosses its cut within ``c2`` times its length."""
    n = metric.n
    if n > CUT_CHECK_MAX_N:
        raise ValueError(f"exhaustive cut check capped at n={CUT_CHECK_MAX_N}")
    if n < 2:
        return VerificationReport("cut-preservation", True)
    tree = tree or exact_mst(metric)
    tin, tout, parent = _euler_tour(n, tree.u, tree.v)
    eu, ev = sp.edge_arrays()
    ew = metric.dist[eu, ev]
    light_cut = sp.d_m / n**3
    for a, b, w in zip(tree.u.tolist(), tree.v.tolist(), tree.w.tolist()):
        if w <= light_cut:
            continue
        child = b if parent[b] == a else a
        lo, hi = tin[child], tout[child]
        side_u = (tin[eu] >= lo) & (tin[eu] <= hi)
        side_v = (tin[ev] >= lo) & (tin[ev] <= hi)
        crossing = side_u != side_v
        if not np.any(crossing & (ew <= sp.c2 * w)):
            return VerificationReport("cut-preservation", False, [a, b])
    return VerificationReport("cut-preservation", True)


def layer_degree_bound(c2: float, rho: float) -> int:
    """``2^(rho * ceil(log2(2 c2)))``: packing bound on kept neighbours per layer."""
    return int(round(2 ** (rho * math.ceil(math.log2(2 * c2)))))


def check_layer_structure(metric: MetricSpace, sp: Sparsifier, rho: float) -> list[VerificationReport]:
    """Per-layer degree bound, and kept neighbours of a vertex being close to each other."""
    c3 = layer_degree_bound(sp.c2, rho)
    deg_fail = clique_fail = None
    n = metric.n
    for i, ly in enumerate(sp.layers, start=1):
        deg = np.bincount(np.r_[ly.u, ly.v], minlength=n)
        if deg_fail is None and deg.max(initial=0) > c3:
            deg_fail = [i, int(np.argmax(deg)), int(deg.max())]
        reach = ly.radius * sp.c1**sp.delta
        if clique_fail is None and 2 * sp.c2 * ly.radius > reach:
            clique_fail = [i, "radius"]
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for a, b in zip(ly.u.tolist(), ly.v.tolist()):
            nbrs[a].append(b)
            nbrs[b].append(a)
        for x in range(n):
            if clique_fail is not None or len(nbrs[x]) < 2:
                continue
            ids = np.asarray(nbrs[x])
            if metric.dist[np.ix_(ids, ids)].max() > reach:
                clique_fail = [i, x]
    return [
        VerificationReport(f"layer-degree<={c3}", deg_fail is None, deg_fail),
        VerificationReport("layer-neighbours-close", clique_fail is None, clique_fail),
    ]
