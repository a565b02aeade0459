"""Metric spaces, graphs, instance generators and basic graph queries."""
from __future__ import annotations

import json
import math
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, NotMetricError, UndefinedAspectRatio

__all__ = [
    "MetricSpace",
    "Graph",
    "InstanceSpec",
    "Instance",
    "threshold_graph",
    "aspect_ratio",
    "growth_bound_check",
    "generate",
    "bfs_distance",
    "as_mask",
]


def as_mask(vertices, n: int) -> np.ndarray:
    """Boolean membership mask from a mask, an id iterable or ``None`` (= all)."""
    if vertices is None:
        return np.ones(n, dtype=bool)
    arr = np.asarray(vertices)
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise ValueError("mask has wrong length")
        return arr.copy()
    mask = np.zeros(n, dtype=bool)
    ids = np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices, dtype=np.int64)
    if ids.size:
        if ids.min() < 0 or ids.max() >= n:
            raise ValueError("vertex id out of range")
        mask[ids] = True
    return mask


class MetricSpace:
    """A finite metric given by its dense distance matrix."""

    def __init__(self, dist, points=None):
        d = np.array(dist, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if np.any(d < 0) or np.any(np.diag(d) != 0):
            raise ValueError("distances must be non-negative with a zero diagonal")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix must be symmetric")
        d.setflags(write=False)
        self.dist = d
        self.points = None if points is None else np.asarray(points, dtype=np.float64)

    @classmethod
    def from_points(cls, points) -> "MetricSpace":
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return cls(kernels.pairwise_euclidean(pts), pts)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def ball(self, v: int, radius: float) -> np.ndarray:
        return self.dist[v] <= radius

    def scaled(self, factor: float) -> "MetricSpace":
        pts = None if self.points is None else self.points * factor
        return MetricSpace(self.dist * factor, pts)

    def triangle_violations(self, tol: float = 1e-12, limit: int = 1) -> list[tuple[int, int, int]]:
        """Triples (u, v, w) with d(u,w) > d(u,v) + d(v,w), up to ``limit``."""
        d = self.dist
        out = []
        for v in range(self.n):
            via = d[:, v, None] + d[None, v, :]
            bad = d > via * (1 + tol)
            if bad.any():
                us, ws = np.nonzero(bad)
                for u, w in zip(us[:limit], ws[:limit]):
                    out.append((int(u), v, int(w)))
                if len(out) >= limit:
                    return out[:limit]
        return out


class Graph:
    """Undirected simple graph on vertex ids ``0..n-1`` in CSR form.

    Sub-graphs keep the global id space; vertices outside a restriction are
    just isolated.
    """

    __slots__ = ("n", "indptr", "indices", "eu", "ev")

    def __init__(self, n: int, u=(), v=()):
        u = np.asarray(u, dtype=np.int64).reshape(-1)
        v = np.asarray(v, dtype=np.int64).reshape(-1)
        if u.size:
            if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(u == v):
                raise ValueError("self-loops are not allowed")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        key = np.unique(lo * n + hi)
        self.n = int(n)
        self.eu = key // n if n else key
        self.ev = key % n if n else key
        rows = np.concatenate([self.eu, self.ev])
        cols = np.concatenate([self.ev, self.eu])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=self.indptr[1:])
        self.indices = cols.astype(np.int64)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def from_adjacency(cls, adj) -> "Graph":
        a = np.asarray(adj, dtype=bool)
        u, v = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], u, v)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        u, v = np.triu_indices(n, 1)
        return cls(n, u, v)

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, np.arange(n - 1), np.arange(1, n))

    @property
    def m(self) -> int:
        return int(self.eu.size)

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def restrict(self, vertices) -> "Graph":
        """Induced subgraph G[vertices], in the same id space."""
        mask = as_mask(vertices, self.n)
        keep = mask[self.eu] & mask[self.ev]
        return Graph(self.n, self.eu[keep], self.ev[keep])

    def closed_neighborhood(self, vertices) -> np.ndarray:
        """Mask of ``vertices`` together with all their neighbours."""
        mask = as_mask(vertices, self.n)
        out = mask.copy()
        out[self.ev[mask[self.eu]]] = True
        out[self.eu[mask[self.ev]]] = True
        return out

    def count_edges_within(self, vertices) -> int:
        mask = as_mask(vertices, self.n)
        return int(np.count_nonzero(mask[self.eu] & mask[self.ev]))

    def degree_within(self, vertices) -> np.ndarray:
        """Per-vertex number of neighbours inside ``vertices``."""
        mask = as_mask(vertices, self.n)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        return np.bincount(rows, weights=mask[self.indices], minlength=self.n).astype(np.int64)

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.eu.tolist(), self.ev.tolist()))

    def adjacency_lists(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self.eu, other.eu)
            and np.array_equal(self.ev, other.ev)
        )

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def threshold_graph(metric: MetricSpace, r: float, vertices=None) -> Graph:
    """Distance-threshold graph: u ~ v iff u != v and d(u, v) <= r."""
    if r < 0:
        raise ValueError("threshold must be non-negative")
    n = metric.n
    if vertices is None:
        u, v = np.nonzero(np.triu(metric.dist <= r, 1))
        return Graph(n, u, v)
    idx = np.flatnonzero(as_mask(vertices, n))
    sub = metric.dist[np.ix_(idx, idx)]
    u, v = np.nonzero(np.triu(sub <= r, 1))
    return Graph(n, idx[u], idx[v])


def _pair_extremes(metric: MetricSpace, Y) -> tuple[float, float]:
    idx = np.flatnonzero(as_mask(Y, metric.n))
    if idx.size < 2:
        raise UndefinedAspectRatio(f"aspect ratio needs at least 2 points, got {idx.size}")
    sub = metric.dist[np.ix_(idx, idx)]
    off = sub[np.triu_indices(idx.size, 1)]
    return float(off.max()), float(off.min())


def aspect_ratio(metric: MetricSpace, Y) -> float:
    """Max over min pairwise distance within ``Y``."""
    hi, lo = _pair_extremes(metric, Y)
    if lo == 0:
        raise UndefinedAspectRatio("coincident points in Y")
    return hi / lo


def growth_bound_check(metric: MetricSpace, Y, rho: float) -> bool:
    """Literal evaluation of |Y| <= 2^(rho * ceil(log2 aspect_ratio(Y)))."""
    lam = aspect_ratio(metric, Y)
    size = int(np.count_nonzero(as_mask(Y, metric.n)))
    return size <= 2.0 ** (rho * math.ceil(math.log2(lam)))


def bfs_distance(graph: Graph, source) -> np.ndarray:
    """Hop distance from ``source`` (an id or a set of ids); ``inf`` if unreachable."""
    src = as_mask([source] if np.isscalar(source) else source, graph.n)
    hops = kernels.multi_source_bfs(graph.indptr, graph.indices, src)
    out = hops.astype(np.float64)
    out[hops < 0] = np.inf
    return out


# ------------------------------------------------------------------ instances

@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    n: int
    seed: int = 0
    dim: int = 2
    p: float = 0.1
    cost_low: float = 0.1
    cost_high: float = 2.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "gnp"):
            raise ConfigError(f"unknown instance kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError("p must lie in [0, 1]")
        if not 0.0 <= self.cost_low <= self.cost_high:
            raise ConfigError("need 0 <= cost_low <= cost_high")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def params(self) -> dict:
        base = {"cost_low": self.cost_low, "cost_high": self.cost_high}
        if self.kind == "euclidean":
            return {"dim": self.dim, **base}
        return {"p": self.p, **base}


@dataclass
class Instance:
    spec: InstanceSpec
    metric: MetricSpace | None
    graph: Graph | None
    costs: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    def require_metric(self) -> MetricSpace:
        if self.metric is None:
            raise NotMetricError(f"{self.spec.kind} instances carry no metric")
        return self.metric

    def to_dict(self) -> dict:
        out = {
            "kind": self.spec.kind,
            "n": self.spec.n,
            "seed": self.spec.seed,
            "params": self.spec.params(),
        }
        if self.metric is not None and self.metric.points is not None:
            out["points"] = self.metric.points.tolist()
        if self.graph is not None:
            out["edges"] = [list(e) for e in self.graph.edges()]
        out["facility_costs"] = self.costs.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        params = dict(data.get("params", {}))
        spec = InstanceSpec(kind=data["kind"], n=int(data["n"]), seed=int(data.get("seed", 0)), **params)
        costs = np.asarray(data.get("facility_costs", np.zeros(spec.n)), dtype=np.float64)
        if spec.kind == "euclidean":
            metric = MetricSpace.from_points(np.asarray(data["points"], dtype=np.float64).reshape(spec.n, -1))
            return cls(spec, metric, None, costs)
        edges = np.asarray(data.get("edges", []), dtype=np.int64).reshape(-1, 2)
        return cls(spec, None, Graph(spec.n, edges[:, 0], edges[:, 1]), costs)


def generate(spec: InstanceSpec) -> Instance:
    """Build the instance described by ``spec``; a pure function of it."""
    ss = np.random.SeedSequence([spec.seed, 0x1A57])
    geo_ss, cost_ss = ss.spawn(2)
    rng = np.random.default_rng(geo_ss)
    costs = np.random.default_rng(cost_ss).uniform(spec.cost_low, spec.cost_high, spec.n)
    if spec.kind == "euclidean":
        pts = rng.random((spec.n, spec.dim))
        return Instance(spec, MetricSpace.from_points(pts), None, costs)
    iu, iv = np.triu_indices(spec.n, 1)
    keep = rng.random(iu.size) < spec.p
    return Instance(spec, None, Graph(spec.n, iu[keep], iv[keep]), costs)


def gnp_graph(n: int, p: float, seed: int) -> Graph:
    return generate(InstanceSpec("gnp", n, seed=seed, p=p)).graph


def euclidean_metric(n: int, dim: int, seed: int) -> MetricSpace:
    return generate(InstanceSpec("euclidean", n, seed=seed, dim=dim)).metric


def as_id_list(mask: np.ndarray) -> list[int]:
    return np.flatnonzero(mask).tolist()


def ids_to_mask(ids: Iterable[int], n: int) -> np.ndarray:
    return as_mask(list(ids), n)
