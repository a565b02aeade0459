import numpy as np
import pytest
from hypothesis import settings

from cclique import Clique, Graph, MetricSpace

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def clique16():
    return Clique(16, seed=3)


def line_metric(xs) -> MetricSpace:
    return MetricSpace.from_points(np.asarray(xs, dtype=float).reshape(-1, 1))


def star(n: int) -> Graph:
    return Graph(n, np.zeros(n - 1, dtype=int), np.arange(1, n))
