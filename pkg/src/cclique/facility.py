"""Metric facility location via per-class ruling sets.

Every node computes its radius ``r_v`` (the ``r`` at which the ball around
``v`` "pays for" its opening cost), learns the smallest radius ``r_m`` from
one broadcast, and joins class ``k`` with ``3^k r_m <= r_v < 3^(k+1) r_m``.
Inside each class, nodes whose balls touch (``d(u, v) <= r_u + r_v``) are
neighbours in the class graph ``H_k``; a ruling set of ``H_k`` opens. The
classes are disjoint, so their ruling-set runs proceed in parallel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .engine import Clique, CostLedger
from .metric import Graph, MetricSpace, as_mask
from .mis import low_dimensional_mis
from .oracles import verify_mis, verify_t_ruling
from .results import FacilitySolution, VerificationReport
from .ruling import three_ruling_set

__all__ = [
    "RadiusProfile",
    "MflResult",
    "compute_radii",
    "classify",
    "class_graph",
    "solve_mfl",
]

MODES = ("general", "doubling")


@dataclass
class RadiusProfile:
    r: np.ndarray
    r_m: float
    classes: np.ndarray

    @property
    def num_classes(self) -> int:
        return int(np.unique(self.classes).size)

    def members(self, k: int) -> np.ndarray:
        return self.classes == k


@dataclass
class MflResult:
    solution: FacilitySolution
    profile: RadiusProfile
    mode: str
    ledger: CostLedger
    class_sets: dict[int, np.ndarray] = field(default_factory=dict)
    reports: list[VerificationReport] = field(default_factory=list)

    @property
    def open(self) -> np.ndarray:
        return self.solution.open

    @property
    def cost(self) -> float:
        return self.solution.cost


def compute_radii(metric: MetricSpace, costs) -> np.ndarray:
    """Per node, the ``r >= 0`` solving ``sum over d(v,u) <= r of (r - d(v,u)) = f_v``."""
    f = np.asarray(costs, dtype=np.float64)
    if f.shape != (metric.n,):
        raise ValueError("one opening cost per node")
    if np.any(f <= 0):
        raise ValueError("opening costs must be positive")
    return kernels.mp_radii(metric.dist, f)


def classify(r) -> RadiusProfile:
    """Half-open classes ``[3^k r_m, 3^(k+1) r_m)``; a radius on a boundary goes up."""
    r = np.asarray(r, dtype=np.float64)
    r_m = float(r.min())
    classes = np.zeros(r.size, dtype=np.int64)
    for v, rv in enumerate(r.tolist()):
        k = int(math.floor(math.log(rv / r_m, 3))) if rv > r_m else 0
        while r_m * 3.0 ** (k + 1) <= rv:
            k += 1
        while k > 0 and r_m * 3.0**k > rv:
            k -= 1
        classes[v] = k
    return RadiusProfile(r, r_m, classes)


def class_graph(metric: MetricSpace, profile: RadiusProfile, k: int) -> Graph:
    """``H_k``: members of class ``k`` whose balls touch, ``d(u, v) <= r_u + r_v``."""
    ids = np.flatnonzero(profile.classes == k)
    sub = metric.dist[np.ix_(ids, ids)]
    rr = profile.r[ids]
    u, v = np.nonzero(np.triu(sub <= rr[:, None] + rr[None, :], 1))
    return Graph(metric.n, ids[u], ids[v])


def solve_mfl(metric: MetricSpace, costs, clique: Clique, mode: str = "general") -> MflResult:
    """Open the union of per-class ruling sets (``general``) or MISes (``doubling``).

    Phases: ``radii`` (one broadcast so everyone knows all radii),
    ``classes`` (the parallel per-class runs, charged by the configured
    parallel rule) and ``assign`` (one broadcast of who opened; each client
    then picks its nearest open facility, lowest id on ties).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    f = np.asarray(costs, dtype=np.float64)
    n = metric.n
    with clique.phase("radii"):
        r = compute_radii(metric, f)
        clique.broadcast_array(np.arange(n), r)
        profile = classify(r)

    opened = np.zeros(n, dtype=bool)
    class_sets: dict[int, np.ndarray] = {}
    reports: list[VerificationReport] = []
    ledgers = []
    seen = np.zeros(n, dtype=bool)
    with clique.phase("classes"):
        for k in np.unique(profile.classes).tolist():
            Vk = profile.members(k)
            if np.any(seen & Vk):
                raise AssertionError("class vertex sets overlap")
            seen |= Vk
            H = class_graph(metric, profile, k)
            sub = clique.fork(f"class{k}")
            if mode == "general":
                members = three_ruling_set(H, sub, Vk).members
                rep = verify_t_ruling(H, members, 3, Vk)
            else:
                scale = 2.0 * float(profile.r[Vk].max())
                members = low_dimensional_mis(metric, scale, sub, vertices=Vk, graph=H).members
                rep = verify_mis(H, members, Vk)
            reports.append(VerificationReport(f"class{k}:{rep.check}", rep.passed, rep.witness))
            class_sets[k] = np.flatnonzero(members)
            opened |= members
            ledgers.append(sub.ledger)
        clique.absorb_parallel(ledgers)
    if not seen.all():
        raise AssertionError("some node belongs to no class")
    with clique.phase("assign"):
        ids = np.flatnonzero(opened)
        clique.broadcast_array(ids, np.ones(ids.size, dtype=np.int64))
    solution = FacilitySolution.evaluate(metric.dist, f, opened)
    return MflResult(solution, profile, mode, clique.ledger, class_sets, reports)
