"""Hypothesis strategies shared by the property tests."""
import numpy as np
from hypothesis import strategies as st

from cclique import Graph, MetricSpace


@st.composite
def graphs(draw, min_n=1, max_n=24):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [e for e, k in zip(pairs, keep) if k]
    u = [a for a, _ in edges]
    v = [b for _, b in edges]
    return Graph(n, u, v)


@st.composite
def point_metrics(draw, min_n=2, max_n=14, dim=2):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**31 - 1))
    pts = np.random.default_rng(seed).random((n, dim))
    return MetricSpace.from_points(pts)
