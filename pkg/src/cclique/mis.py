"""Constant-round MIS for threshold graphs over low doubling-dimension metrics.

Four phases run in sequence on the simulated clique:

``p1`` reduce degree
    Contiguous id blocks of about ``sqrt(n)`` vertices are each gathered at
    their lowest member and solved locally; the union ``P`` dominates ``V``
    and has maximum degree ``O(sqrt n)``.
``p2`` sample and prune
    ``ceil(2 log2 n)`` independent samples of ``P`` at rate ``n^(-1/4)`` are
    gathered at distinct receivers, solved locally, and merged by the local
    MIS black box into ``Q``, a 2-ruling set of the sampled vertices ``W``.
``p3`` mop up
    The black box runs once more on the part of ``P`` that ``W`` leaves
    uncovered, giving ``R``.
``p4`` ruling set to MIS
    ``S = Q | R`` dominates within four hops. ``S`` is coloured properly on
    its ``9r`` threshold graph, and colour by colour every centre extends
    the MIS greedily inside its ``4r`` ball. Same-coloured balls are more
    than ``r`` apart, so they never interfere.

The pipeline accepts any target graph whose edges are all at most ``r``
long, not only the threshold graph itself; facility location uses this.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .engine import Clique, CostLedger, RoutingBatch
from .errors import ColoringOverflow, DegreeTooHigh, RoutingCapacityExceeded
from .metric import Graph, MetricSpace, as_mask, threshold_graph
from .ruling import _ball_reach, _ball_shipment

__all__ = [
    "log_star",
    "sw_degree_bound",
    "MisResult",
    "sequential_mis",
    "sw_mis",
    "reduce_degree",
    "sample_and_prune",
    "greedy_coloring",
    "ruling_to_mis",
    "low_dimensional_mis",
    "sample_count",
]


# Networks this small make the per-receiver bound on sampled edges vacuous.
STRICT_SAMPLE_MIN_N = 64


def log_star(x: float) -> int:
    """Iterated base-2 logarithm: applications of log2 until the value is <= 1."""
    count = 0
    while x > 1:
        x = math.log2(x)
        count += 1
    return count


def sw_degree_bound(n: int, rho: float, const: float) -> float:
    """Largest degree the local-MIS black box accepts: ``const * sqrt(n) / (log* n)^(rho/2)``."""
    ls = max(log_star(n), 1)
    return const * math.sqrt(n) / ls ** (rho / 2)


def sample_count(n_active: int) -> int:
    return math.ceil(2 * math.log2(n_active)) if n_active > 1 else 0


@dataclass
class MisResult:
    members: np.ndarray  # boolean mask over the network ids
    ledger: CostLedger
    reduced: np.ndarray | None = None  # P
    sampled: np.ndarray | None = None  # W
    sample_ruling: np.ndarray | None = None  # Q
    leftover: np.ndarray | None = None  # V'
    leftover_mis: np.ndarray | None = None  # R
    centers: np.ndarray | None = None  # S
    colors: np.ndarray | None = None
    whp_flags: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.members.sum())

    @property
    def whp_ok(self) -> bool:
        return all(self.whp_flags.values())


# ------------------------------------------------------------ local pieces

def sequential_mis(graph: Graph, vertices=None) -> np.ndarray:
    """Greedy-by-id MIS of ``graph[vertices]``: the unique lexicographically first one."""
    return kernels.greedy_mis(graph.indptr, graph.indices, as_mask(vertices, graph.n))


def sw_mis(graph: Graph, vertices, clique: Clique, strategy: str | None = None) -> np.ndarray:
    """MIS of ``graph[vertices]`` through the pluggable local-MIS black box.

    ``oracle`` charges a flat ``swmis_rounds``. ``faithful`` additionally
    routes every vertex's ``f * log* n``-hop ball to all of its members,
    radius doubling at a time, so message volume is real. Both return the
    greedy-by-id MIS, which every ball view agrees on.
    """
    cfg = clique.config
    strategy = strategy or cfg.sw_strategy
    mask = as_mask(vertices, graph.n)
    deg = graph.degree_within(mask)
    top = int(deg[mask].max()) if mask.any() else 0
    bound = sw_degree_bound(clique.n, cfg.rho, cfg.sw_degree_const)
    if top > bound:
        node = int(np.flatnonzero(mask & (deg == top))[0])
        raise DegreeTooHigh(f"vertex {node} has degree {top} > {bound:.2f} allowed by the local MIS black box")
    if strategy == "faithful":
        _charge_ball_growing(graph, mask, clique)
    clique.charge(cfg.swmis_rounds, 0)
    return sequential_mis(graph, mask)


def _charge_ball_growing(graph: Graph, mask: np.ndarray, clique: Clique) -> None:
    import scipy.sparse as sp

    sub = graph.restrict(mask)
    ids = np.flatnonzero(sub.degrees() > 0)
    if ids.size == 0:
        return
    pos = np.full(graph.n, -1, dtype=np.int64)
    pos[ids] = np.arange(ids.size)
    adj = sp.csr_matrix(
        (np.ones(2 * sub.m, dtype=np.int64), (pos[np.r_[sub.eu, sub.ev]], pos[np.r_[sub.ev, sub.eu]])),
        shape=(ids.size, ids.size),
    )
    target = max(1, math.ceil(clique.config.sw_radius_const * max(log_star(clique.n), 1)))
    radius = 1
    while radius < 2 * target:
        reach = _ball_reach(adj, radius)
        clique.route_bulk(_ball_shipment(adj, reach, ids))
        radius *= 2


def _notify(clique: Clique, pairs_src: np.ndarray, pairs_dst: np.ndarray) -> None:
    """One direct round carrying a one-bit answer along each (src, dst) link."""
    remote = pairs_src != pairs_dst
    s, d = pairs_src[remote], pairs_dst[remote]
    if s.size:
        key = np.unique(s * clique.n + d)
        s, d = key // clique.n, key % clique.n
    clique.direct_array(s, d, np.ones(s.size, dtype=np.int64))


# ------------------------------------------------------------------ phase 1

def reduce_degree(graph: Graph, clique: Clique, vertices=None) -> np.ndarray:
    """``P``: union of local MISes of contiguous id blocks of ``ceil(sqrt n)`` vertices."""
    mask = as_mask(vertices, graph.n)
    ids = np.flatnonzero(mask)
    if ids.size == 0:
        clique.lenzen_route(RoutingBatch.empty())
        return mask.copy()
    block = math.ceil(math.sqrt(ids.size))
    part = np.full(graph.n, -1, dtype=np.int64)
    part[ids] = np.arange(ids.size) // block
    leader = ids[(np.arange(ids.size) // block) * block]
    lead_of = np.full(graph.n, -1, dtype=np.int64)
    lead_of[ids] = leader
    same = (part[graph.eu] >= 0) & (part[graph.eu] == part[graph.ev])
    eu, ev = graph.eu[same], graph.ev[same]
    clique.lenzen_route(RoutingBatch(eu, lead_of[eu]))
    P = sequential_mis(Graph(graph.n, eu, ev), mask)
    pid = np.flatnonzero(P)
    _notify(clique, lead_of[pid], pid)
    return P


# ------------------------------------------------------------------ phase 2

def sample_and_prune(graph: Graph, reduced, clique: Clique, n_active: int, receiver_offset: int = 0):
    """``(W, Q, coverage_ok)`` for the reduced set ``P``.

    Sample ``i`` is gathered at node ``(receiver_offset + i) mod n``; each
    member sends one membership envelope plus, from its lower endpoint,
    one envelope per sampled edge. Receivers answer their local MIS in one
    direct round, and the local-MIS black box then merges the answers.
    """
    n = clique.n
    P = as_mask(reduced, graph.n)
    K = sample_count(n_active)
    W = np.zeros(graph.n, dtype=bool)
    X = np.zeros(graph.n, dtype=bool)
    if K == 0 or not P.any():
        clique.lenzen_route(RoutingBatch.empty())
        return W, X, True
    rate = n_active ** -0.25
    coins = clique.uniform("mis/sample", K)
    inside = P[:, None] & (coins < rate)
    receivers = (receiver_offset + np.arange(K)) % n
    srcs, dsts, ans_src, ans_dst = [], [], [], []
    samples = []
    for i in range(K):
        Wi = inside[:, i]
        members = np.flatnonzero(Wi)
        keep = Wi[graph.eu] & Wi[graph.ev]
        srcs += [members, graph.eu[keep]]
        dsts.append(np.full(members.size + int(keep.sum()), receivers[i], dtype=np.int64))
        samples.append(Wi)
    batch = RoutingBatch(np.concatenate(srcs), np.concatenate(dsts))
    remote = batch.src != batch.dst
    per_dst = np.bincount(batch.dst[remote], minlength=n)
    if n >= STRICT_SAMPLE_MIN_N and per_dst.max() > n:
        v = int(np.argmax(per_dst))
        raise RoutingCapacityExceeded(v, "destination", int(per_dst[v]), n)
    # a vertex sitting in many samples may need extra invocations on the sending side;
    # below STRICT_SAMPLE_MIN_N a dense sample can also overflow its receiver
    clique.route_bulk(batch)
    for i, Wi in enumerate(samples):
        Xi = sequential_mis(graph, Wi)
        xi = np.flatnonzero(Xi)
        ans_src.append(np.full(xi.size, receivers[i], dtype=np.int64))
        ans_dst.append(xi)
        W |= Wi
        X |= Xi
    _notify(clique, np.concatenate(ans_src), np.concatenate(ans_dst))
    Q = sw_mis(graph, X, clique)
    degP = graph.degree_within(P)
    heavy = P & (degP >= n_active ** 0.25)
    covered = graph.closed_neighborhood(W)
    return W, Q, bool(np.all(covered[heavy]))


# ------------------------------------------------------------------ phase 4

def greedy_coloring(graph: Graph, vertices, palette: int) -> np.ndarray:
    """Smallest free colour in ascending id order; ``-1`` off ``vertices``.

    Raises :class:`ColoringOverflow` if more than ``palette`` colours are needed.
    """
    mask = as_mask(vertices, graph.n)
    colors = np.full(graph.n, -1, dtype=np.int64)
    for v in np.flatnonzero(mask):
        nb = graph.neighbors(v)
        used = colors[nb[nb < v]]
        used = np.unique(used[used >= 0])
        gaps = np.flatnonzero(used != np.arange(used.size))
        c = int(gaps[0]) if gaps.size else used.size
        if c >= palette:
            raise ColoringOverflow(f"vertex {int(v)} needs colour {c + 1} > palette {palette}")
        colors[v] = c
    return colors


def ruling_to_mis(
    graph: Graph, metric: MetricSpace, r: float, centers, clique: Clique, vertices=None
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Extend a 4-ruling set ``centers`` to an MIS of ``graph[vertices]``.

    Returns ``(mis, colors, stats)``. ``stats['balls_separated']`` records
    the check that no edge joins two same-coloured balls.
    """
    cfg = clique.config
    n = clique.n
    scope = as_mask(vertices, graph.n)
    S = as_mask(centers, graph.n) & scope
    I = np.zeros(graph.n, dtype=bool)
    stats = {"max_degree_9r": 0, "colors_used": 0, "balls_separated": True}
    if not S.any():
        return I, np.full(graph.n, -1, dtype=np.int64), stats
    sid = np.flatnonzero(S)
    leader = int(sid[0])
    g9 = threshold_graph(metric, 9 * r, S)
    stats["max_degree_9r"] = int(g9.degree_within(S)[S].max())
    clique.route_bulk(RoutingBatch(np.r_[sid, g9.eu], np.full(sid.size + g9.m, leader, dtype=np.int64)))
    colors = greedy_coloring(g9, S, cfg.gamma + 1)
    _send_colors(clique, leader, sid, colors)
    palette_used = np.unique(colors[sid])
    stats["colors_used"] = int(palette_used.size)

    active = scope.copy()
    scope_ids = np.flatnonzero(scope)
    for c in palette_used:
        ids = np.flatnonzero(active)
        clique.broadcast_array(ids, np.ones(ids.size, dtype=np.int64))
        cent = sid[colors[sid] == c]
        near = metric.dist[np.ix_(cent, scope_ids)] <= 4 * r
        near &= active[scope_ids][None, :]
        owners = near.sum(axis=0)
        ball = np.zeros(graph.n, dtype=bool)
        ball[scope_ids[owners > 0]] = True
        owner = np.full(graph.n, -1, dtype=np.int64)
        owner[scope_ids[owners > 0]] = cent[np.argmax(near[:, owners > 0], axis=0)]
        if np.any(owners > 1):
            stats["balls_separated"] = False
        cross = ball[graph.eu] & ball[graph.ev] & (owner[graph.eu] != owner[graph.ev])
        if cross.any():
            stats["balls_separated"] = False
        joined, rounds = kernels.local_min_mis(graph.indptr, graph.indices, ball)
        # each local-minimum round is one broadcast by the vertices joining in it
        clique.charge(rounds, int(joined.sum()) * (n - 1))
        I |= joined
        active &= ~graph.closed_neighborhood(joined)
    return I, colors, stats


def _send_colors(clique: Clique, leader: int, sid: np.ndarray, colors: np.ndarray) -> None:
    others = sid[sid != leader]
    clique.direct_array(np.full(others.size, leader, dtype=np.int64), others, colors[others])


# ----------------------------------------------------------------- pipeline

def low_dimensional_mis(
    metric: MetricSpace,
    r: float,
    clique: Clique,
    vertices=None,
    graph: Graph | None = None,
    receiver_offset: int = 0,
) -> MisResult:
    """MIS of ``graph`` (default: the ``r`` threshold graph on ``vertices``).

    Every edge of a supplied ``graph`` must be at most ``r`` long. Phases
    are charged under ``p1`` .. ``p4``.
    """
    scope = as_mask(vertices, metric.n)
    if graph is None:
        graph = threshold_graph(metric, r, scope)
    elif graph.m and float(metric.dist[graph.eu, graph.ev].max()) > r:
        raise ValueError("target graph has an edge longer than the metric scale r")
    graph = graph.restrict(scope)
    n_active = int(scope.sum())

    with clique.phase("p1"):
        P = reduce_degree(graph, clique, scope)
    with clique.phase("p2"):
        W, Q, covered = sample_and_prune(graph, P, clique, n_active, receiver_offset)
    with clique.phase("p3"):
        wid = np.flatnonzero(W)
        clique.broadcast_array(wid, np.ones(wid.size, dtype=np.int64))
        Vp = P & ~graph.closed_neighborhood(W)
        R = sw_mis(graph, Vp, clique)
    S = Q | R
    with clique.phase("p4"):
        I, colors, stats = ruling_to_mis(graph, metric, r, S, clique, scope)

    hops = kernels.multi_source_bfs(graph.indptr, graph.indices, S, scope)
    far = scope & ((hops < 0) | (hops > 4))
    degP = graph.degree_within(P)
    degV = graph.degree_within(Vp)
    stats.update(
        max_degree_P=int(degP[P].max()) if P.any() else 0,
        max_degree_leftover=int(degV[Vp].max()) if Vp.any() else 0,
        samples=sample_count(n_active),
    )
    flags = {"coverage": covered, "four_ruling": not far.any(), "balls_separated": stats["balls_separated"]}
    return MisResult(I, clique.ledger, P, W, Q, Vp, R, S, colors, flags, stats)
