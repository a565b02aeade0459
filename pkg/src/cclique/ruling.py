"""Degree decomposition, vertex selection and the 2- and 3-ruling-set algorithms.

The decomposition splits the vertices into classes ``U_1 .. U_{k*+1}`` by
their degree in the graph that remains once the lower classes are peeled
off, against the thresholds ``D_k = n^(1/2^k)``. Low classes are decided by
the lazy phase (one broadcast round per class), the rest by the speedy
phase, which grows radius-doubling balls of the small residual graph
through the routing primitive and finishes the peeling locally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .engine import Clique, CostLedger, RoutingBatch
from .metric import Graph, as_mask

__all__ = [
    "degree_thresholds",
    "lazy_rounds",
    "speedy_iterations",
    "DegreeDecomposition",
    "RulingSetResult",
    "lazy_phase",
    "residual_degree",
    "speedy_phase",
    "decompose",
    "selection_probability",
    "vertex_selection",
    "local_mis",
    "sample_rate",
    "two_ruling_set",
    "three_ruling_set",
]


# ------------------------------------------------------------- thresholds

def degree_thresholds(n: int) -> tuple[int, np.ndarray]:
    """``(k_star, D)`` with ``k_star = ceil(log2 log2 n)`` and ``D_k = n^(1/2^k)``.

    ``D`` is built by repeated square roots, so powers of two come out exact.
    """
    if n < 2:
        raise ValueError("degree thresholds need n >= 2")
    k_star = math.ceil(math.log2(math.log2(n))) if n > 2 else 0
    D = np.empty(k_star + 1)
    D[0] = float(n)
    for k in range(1, k_star + 1):
        D[k] = math.sqrt(D[k - 1])
    return k_star, D


def _lll(n: int) -> float:
    ll = math.log2(math.log2(n))
    return math.log2(ll) if ll > 0 else -math.inf


def lazy_rounds(n: int) -> int:
    """Broadcast rounds of the lazy phase: ``max(1, ceil(1 + log2 log2 log2 n))``."""
    if n < 4:
        return 1
    return max(1, math.ceil(1 + _lll(n)))


def speedy_iterations(n: int) -> int:
    """Ball-doubling iterations of the speedy phase: ``max(0, ceil(log2 log2 log2 n))``."""
    if n < 4:
        return 0
    return max(0, math.ceil(_lll(n)))


# ----------------------------------------------------------------- records

@dataclass
class DegreeDecomposition:
    """Per-vertex class labels; 0 marks vertices outside the decomposed scope."""

    n: int
    k_star: int
    thresholds: np.ndarray
    labels: np.ndarray
    lazy_labels: np.ndarray
    lazy_iterations: int
    speedy_iterations: int
    speedy_skipped: bool = False

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def class_sizes(self) -> dict[int, int]:
        ks, counts = np.unique(self.labels[self.labels > 0], return_counts=True)
        return dict(zip(ks.tolist(), counts.tolist()))


@dataclass
class RulingSetResult:
    members: np.ndarray  # boolean mask
    t: int
    ledger: CostLedger
    decomposition: DegreeDecomposition | None = None
    selected: np.ndarray | None = None
    selected_edges: int = 0
    loop_iterations: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.members.sum())


# ---------------------------------------------------------- decomposition

def residual_degree(graph: Graph, u: int, decided) -> int:
    """Degree of ``u`` minus its neighbours that already carry a class."""
    nb = graph.neighbors(u)
    mask = as_mask(decided, graph.n)
    return int(nb.size - np.count_nonzero(mask[nb]))


def lazy_phase(graph: Graph, clique: Clique, vertices=None) -> tuple[np.ndarray, int]:
    """Decide classes ``1..t``; returns ``(partial_labels, t)``.

    In iteration ``i`` every still-unclassed vertex whose residual degree
    lies in ``[D_i, D_{i-1})`` takes class ``i`` and broadcasts it, so all
    residual degrees are current for the next iteration. Exactly ``t``
    broadcast rounds are charged, whether or not anybody speaks.
    """
    n = clique.n
    k_star, D = degree_thresholds(n)
    t = lazy_rounds(n)
    alive = as_mask(vertices, graph.n).copy()
    labels = np.zeros(graph.n, dtype=np.int64)
    for i in range(1, t + 1):
        if i <= k_star:
            deg = graph.degree_within(alive)
            join = alive & (deg >= D[i]) & (deg < D[i - 1])
        else:
            join = np.zeros(graph.n, dtype=bool)
        ids = np.flatnonzero(join)
        clique.broadcast_array(ids, np.full(ids.size, i, dtype=np.int64))
        labels[join] = i
        alive &= ~join
    return labels, t


def _ball_reach(adj: sp.csr_matrix, radius: int) -> sp.csr_matrix:
    """Boolean matrix of pairs within ``radius`` hops."""
    step = (adj + sp.identity(adj.shape[0], format="csr", dtype=np.int64)).astype(bool).astype(np.int64)
    reach = sp.identity(adj.shape[0], format="csr", dtype=np.int64)
    for _ in range(radius):
        reach = (reach @ step).astype(bool).astype(np.int64)
    return reach.tocsr()


def _ball_shipment(adj: sp.csr_matrix, reach: sp.csr_matrix, ids: np.ndarray) -> RoutingBatch:
    """Every vertex sends its ball's edge list, one edge per envelope, to each ball member."""
    # edges with both endpoints inside each row's ball
    inside = (reach @ adj).multiply(reach)
    edges_in_ball = np.asarray(inside.sum(axis=1)).ravel() // 2
    coo = reach.tocoo()
    off = coo.row != coo.col
    src, dst = coo.row[off], coo.col[off]
    reps = edges_in_ball[src]
    return RoutingBatch(np.repeat(ids[src], reps), np.repeat(ids[dst], reps))


def speedy_phase(graph: Graph, clique: Clique, partial: np.ndarray, vertices=None) -> tuple[np.ndarray, int, bool]:
    """Complete the labels left at 0 by :func:`lazy_phase`.

    Returns ``(labels, iterations, skipped)``. The residual graph ``G_t`` has
    small maximum degree, so each vertex learns its whole neighbourhood ball
    by one neighbour exchange followed by ``iterations`` doublings, each a
    single routing invocation whose capacity is checked, not assumed. The
    classes then follow by local peeling; vertices no threshold catches go
    to the last class ``k*+1``.
    """
    n = clique.n
    k_star, D = degree_thresholds(n)
    t = lazy_rounds(n)
    iters = speedy_iterations(n)
    scope = as_mask(vertices, graph.n)
    unlabeled = scope & (partial == 0)
    labels = partial.copy()
    skipped = n < 16 and not unlabeled.any()

    if not skipped:
        gt = graph.restrict(unlabeled)
        ids = np.flatnonzero(gt.degrees() > 0)
        pos = np.full(graph.n, -1, dtype=np.int64)
        pos[ids] = np.arange(ids.size)
        adj = sp.csr_matrix(
            (np.ones(2 * gt.m, dtype=np.int64),
             (pos[np.r_[gt.eu, gt.ev]], pos[np.r_[gt.ev, gt.eu]])),
            shape=(ids.size, ids.size),
        )
        # neighbour exchange: each vertex sends its adjacency list to every neighbour
        deg = np.diff(adj.indptr)
        rows = np.repeat(np.arange(ids.size), deg)
        reps = deg[rows]
        clique.lenzen_route(RoutingBatch(np.repeat(ids[rows], reps), np.repeat(ids[adj.indices], reps)))
        radius = 1
        for _ in range(iters):
            reach = _ball_reach(adj, radius)
            clique.lenzen_route(_ball_shipment(adj, reach, ids))
            radius *= 2

    alive = unlabeled.copy()
    for k in range(t, k_star):
        deg = graph.degree_within(alive)
        join = alive & (deg >= D[k + 1]) & (deg < D[k])
        labels[join] = k + 1
        alive &= ~join
    labels[alive] = k_star + 1
    return labels, iters, skipped


def decompose(graph: Graph, clique: Clique, vertices=None) -> DegreeDecomposition:
    """Lazy then speedy phase, charged under the phase labels ``lazy`` and ``speedy``."""
    n = clique.n
    k_star, D = degree_thresholds(n)
    with clique.phase("lazy"):
        partial, t = lazy_phase(graph, clique, vertices)
    with clique.phase("speedy"):
        labels, iters, skipped = speedy_phase(graph, clique, partial, vertices)
    return DegreeDecomposition(n, k_star, D, labels, partial, t, iters, skipped)


# -------------------------------------------------------------- selection

def selection_probability(n: int, k: int) -> float:
    """``min(2 log2 n / D_k, 1)`` for ``k <= k*``; the last class is always kept."""
    k_star, D = degree_thresholds(n)
    if k > k_star:
        return 1.0
    return min(2.0 * math.log2(n) / D[k], 1.0)


def vertex_selection(decomp: DegreeDecomposition, clique: Clique) -> np.ndarray:
    """Each classed vertex flips its own coin; no communication."""
    n = decomp.n
    probs = np.array([0.0] + [selection_probability(n, k) for k in range(1, decomp.k_star + 2)])
    coins = clique.uniform("select")
    clique.charge(0, 0)
    labels = decomp.labels
    return (labels > 0) & (coins < probs[labels])


# ------------------------------------------------------------ ruling sets

def local_mis(graph: Graph, vertices) -> np.ndarray:
    """Greedy-by-ascending-id MIS of ``graph[vertices]`` (free local work)."""
    mask = as_mask(vertices, graph.n)
    return kernels.greedy_mis(graph.indptr, graph.indices, mask)


def _ship_to(clique: Clique, graph: Graph, vertices, receiver: int) -> None:
    """Route the edge list of ``graph[vertices]`` to ``receiver``, one edge per envelope."""
    mask = as_mask(vertices, graph.n)
    keep = mask[graph.eu] & mask[graph.ev]
    src = graph.eu[keep]
    clique.route_bulk(RoutingBatch(src, np.full(src.size, receiver, dtype=np.int64)))


def _notify(clique: Clique, receiver: int, members: np.ndarray) -> None:
    """One direct round in which ``receiver`` tells each chosen vertex so."""
    dst = np.flatnonzero(members)
    dst = dst[dst != receiver]
    clique.direct_array(np.full(dst.size, receiver), dst, np.ones(dst.size, dtype=np.int64))


def sample_rate(n: int, m: int) -> float:
    """Sampling probability ``sqrt(n / m)`` of one 2-ruling-set iteration."""
    return math.sqrt(n / m)


def two_ruling_set(graph: Graph, selected, clique: Clique, history: list | None = None) -> tuple[np.ndarray, int]:
    """A 2-ruling set of ``graph[selected]``; returns ``(members, loop_iterations)``.

    While ``G[S]`` has more than ``2n`` edges, a sample ``T`` taken at rate
    ``sqrt(n/m)`` is gathered at one node whenever ``G[T]`` has at most
    ``4n`` edges; an MIS of ``G[T]`` joins the output and ``T`` with its
    neighbourhood leaves ``S``. What remains is gathered whole and solved
    locally. If ``history`` is given, the edge count of ``G[S]`` seen at the
    start of every iteration is appended to it.
    """
    n = clique.n
    S = as_mask(selected, graph.n).copy()
    R = np.zeros(graph.n, dtype=bool)
    if not S.any():
        return R, 0
    receiver = int(np.flatnonzero(S)[0])
    loops = 0
    while True:
        deg = graph.degree_within(S)
        ids = np.flatnonzero(S)
        clique.broadcast_array(ids, deg[ids])
        m = int(deg[ids].sum()) // 2
        if history is not None:
            history.append(m)
        if m <= 2 * n:
            break
        loops += 1
        q = sample_rate(n, m)
        coins = clique.uniform(f"2ruling/sample{loops}")
        T = S & (coins < q)
        tids = np.flatnonzero(T)
        clique.broadcast_array(tids, np.ones(tids.size, dtype=np.int64))
        tdeg = graph.degree_within(T)
        clique.broadcast_array(tids, tdeg[tids])
        if int(tdeg[tids].sum()) // 2 > 4 * n:
            continue
        _ship_to(clique, graph, T, receiver)
        L = local_mis(graph, T)
        _notify(clique, receiver, L)
        R |= L
        S &= ~graph.closed_neighborhood(T)
        if S.any() and not S[receiver]:
            receiver = int(np.flatnonzero(S)[0])
    if S.any():
        _ship_to(clique, graph, S, receiver)
        final = local_mis(graph, S)
        _notify(clique, receiver, final)
        R |= final
    return R, loops


def three_ruling_set(graph: Graph, clique: Clique, vertices=None) -> RulingSetResult:
    """Decompose, select, then take a 2-ruling set of the selected vertices.

    ``vertices`` restricts the run to an induced sub-instance while the
    thresholds keep using the network size ``clique.n``.
    """
    scope = as_mask(vertices, graph.n)
    if clique.n < 4:
        with clique.phase("2ruling"):
            R, loops = two_ruling_set(graph, scope, clique)
        return RulingSetResult(R, 3, clique.ledger, None, scope, graph.count_edges_within(scope), loops)
    decomp = decompose(graph, clique, scope)
    with clique.phase("select"):
        S = vertex_selection(decomp, clique)
    with clique.phase("2ruling"):
        R, loops = two_ruling_set(graph, S, clique)
    return RulingSetResult(R, 3, clique.ledger, decomp, S, graph.count_edges_within(S), loops)
