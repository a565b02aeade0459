"""Centralized ground truth for every distributed output.

Everything here is a pure function of its inputs: no coins, no ledger.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .config import MFL_ORACLE_MAX_N, METRIC_CHECK_MAX_N
from .errors import TooLarge
from .metric import Graph, MetricSpace, as_mask
from .results import FacilitySolution, TreeResult, VerificationReport

__all__ = [
    "exact_mst",
    "prim_mst_weight",
    "verify_independent",
    "verify_mis",
    "verify_t_ruling",
    "brute_force_mfl",
    "reference_decomposition",
    "check_observations",
    "check_metric",
    "components",
]


# ------------------------------------------------------------------- MST

def _metric_edges(metric: MetricSpace):
    u, v = np.triu_indices(metric.n, 1)
    return u, v, metric.dist[u, v]


def exact_mst(source, u=None, v=None, w=None) -> TreeResult:
    """Kruskal forest; ties broken by (weight, min endpoint, max endpoint).

    ``source`` is a :class:`MetricSpace` (the complete metric graph) or the
    vertex count ``n`` of an explicit edge list ``u, v, w``.
    """
    if isinstance(source, MetricSpace):
        n = source.n
        u, v, w = _metric_edges(source)
    else:
        n = int(source)
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo, w))
    lo, hi, w = lo[order], hi[order], w[order]
    keep = kernels.kruskal_select(n, lo, hi) if lo.size else np.zeros(0, dtype=bool)
    tree = TreeResult(n, lo[keep], hi[keep], w[keep])
    tree.spanning = len(tree) == max(n - 1, 0)
    return tree


def prim_mst_weight(metric: MetricSpace) -> float:
    """MST weight by dense Prim; an independent route for cross-checks."""
    parent = kernels.prim_dense(metric.dist)
    kids = np.flatnonzero(parent >= 0)
    return float(metric.dist[kids, parent[kids]].sum())


def components(n: int, u, v) -> np.ndarray:
    return kernels.union_find_labels(n, np.asarray(u), np.asarray(v))


# ----------------------------------------------------- independence & ruling

def verify_independent(graph: Graph, members) -> VerificationReport:
    mask = as_mask(members, graph.n)
    bad = np.flatnonzero(mask[graph.eu] & mask[graph.ev])
    if bad.size:
        e = int(bad[0])
        return VerificationReport("independent", False, [int(graph.eu[e]), int(graph.ev[e])])
    return VerificationReport("independent", True)


def verify_t_ruling(graph: Graph, members, t: int, vertices=None) -> VerificationReport:
    """Independent, and every vertex of ``vertices`` is within ``t`` hops of it.

    Hops are measured inside ``graph`` restricted to ``vertices``.
    """
    scope = as_mask(vertices, graph.n)
    mask = as_mask(members, graph.n)
    name = f"{t}-ruling"
    if np.any(mask & ~scope):
        return VerificationReport(name, False, int(np.flatnonzero(mask & ~scope)[0]))
    ind = verify_independent(graph, mask)
    if not ind:
        return VerificationReport(name, False, ind.witness)
    hops = kernels.multi_source_bfs(graph.indptr, graph.indices, mask, scope)
    far = scope & ((hops < 0) | (hops > t))
    if far.any():
        return VerificationReport(name, False, int(np.flatnonzero(far)[0]))
    return VerificationReport(name, True)


def verify_mis(graph: Graph, members, vertices=None) -> VerificationReport:
    """Independent and maximal within ``vertices`` (default: all)."""
    rep = verify_t_ruling(graph, members, 1, vertices)
    return VerificationReport("mis", rep.passed, rep.witness)


# -------------------------------------------------------- facility location

def brute_force_mfl(metric: MetricSpace, costs) -> FacilitySolution:
    """Exact optimum over all non-empty facility sets (n <= 14)."""
    n = metric.n
    if n > MFL_ORACLE_MAX_N:
        raise TooLarge(f"brute-force facility location capped at n={MFL_ORACLE_MAX_N}, got {n}")
    if n == 0:
        raise ValueError("empty instance")
    f = np.asarray(costs, dtype=np.float64)
    size = 1 << n
    # conn[mask, u] = distance from client u to the nearest facility in mask
    conn = np.full((size, n), np.inf)
    opening = np.zeros(size)
    for b in range(n):
        lo, hi = 1 << b, 1 << (b + 1)
        conn[lo:hi] = np.minimum(conn[:lo], metric.dist[:, b][None, :])
        opening[lo:hi] = opening[:lo] + f[b]
    total = opening[1:] + conn[1:].sum(axis=1)
    best = int(np.argmin(total)) + 1
    open_mask = np.array([(best >> b) & 1 for b in range(n)], dtype=bool)
    return FacilitySolution.evaluate(metric.dist, f, open_mask)


# ------------------------------------------------------ degree decomposition

def reference_decomposition(graph: Graph, vertices=None, n: int | None = None) -> np.ndarray:
    """Class index k(v) by iterated peeling; 0 for vertices outside ``vertices``.

    ``n`` sets the thresholds D_k = n^(1/2^k) (default ``graph.n``).
    """
    from .ruling import degree_thresholds

    n = graph.n if n is None else n
    k_star, D = degree_thresholds(n)
    alive = as_mask(vertices, graph.n)
    labels = np.zeros(graph.n, dtype=np.int64)
    for k in range(k_star):
        deg = graph.degree_within(alive)
        join = alive & (deg >= D[k + 1]) & (deg < D[k])
        labels[join] = k + 1
        alive &= ~join
    labels[alive] = k_star + 1
    return labels


def check_observations(graph: Graph, labels, vertices=None, n: int | None = None) -> list[VerificationReport]:
    """The three easy facts about a degree decomposition, checked directly."""
    from .ruling import degree_thresholds

    n = graph.n if n is None else n
    k_star, D = degree_thresholds(n)
    labels = np.asarray(labels)
    scope = as_mask(vertices, graph.n)
    reports = []

    worst = None
    for k in range(k_star + 1):
        Vk = scope & (labels > k)
        deg = graph.degree_within(Vk)
        over = Vk & (deg >= D[k])
        if over.any():
            worst = [k, int(np.flatnonzero(over)[0])]
            break
    reports.append(VerificationReport("obs-i: max degree of G_k below D_k", worst is None, worst))

    worst = None
    for k in range(1, k_star + 2):
        Uk = scope & (labels == k)
        if not Uk.any():
            continue
        deg = graph.degree_within(scope & (labels >= k))
        over = Uk & (deg >= D[k - 1])
        if over.any():
            worst = [k, int(np.flatnonzero(over)[0])]
            break
    reports.append(VerificationReport("obs-ii: degree into V_(k-1) below D_(k-1)", worst is None, worst))

    worst = None
    for j in range(1, k_star + 1):
        deg_j = graph.degree_within(scope & (labels == j))
        over = scope & (labels > j) & (deg_j >= D[j])
        if over.any():
            worst = [j, int(np.flatnonzero(over)[0])]
            break
    reports.append(VerificationReport("obs-iii: degree into U_j below D_j", worst is None, worst))
    return reports


# ------------------------------------------------------------------ metrics

def check_metric(metric: MetricSpace, tol: float = 1e-12) -> VerificationReport:
    """Exhaustive metric axioms (n <= 256)."""
    if metric.n > METRIC_CHECK_MAX_N:
        raise TooLarge(f"exhaustive metric check capped at n={METRIC_CHECK_MAX_N}")
    d = metric.dist
    off = ~np.eye(metric.n, dtype=bool)
    if np.any(d[off] <= 0):
        u, v = np.argwhere((d <= 0) & off)[0]
        return VerificationReport("metric", False, ["coincident", int(u), int(v)])
    bad = metric.triangle_violations(tol)
    if bad:
        return VerificationReport("metric", False, ["triangle", *bad[0]])
    return VerificationReport("metric", True)
