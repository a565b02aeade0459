import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cclique import (
    ConfigError,
    Graph,
    Instance,
    InstanceSpec,
    MetricSpace,
    NotMetricError,
    UndefinedAspectRatio,
    aspect_ratio,
    bfs_distance,
    generate,
    growth_bound_check,
    threshold_graph,
)
from cclique.oracles import check_metric

from .conftest import line_metric
from .strategies import point_metrics


def test_threshold_graph_on_a_line():
    m = line_metric([0, 1, 2])
    assert threshold_graph(m, 1).edges() == [(0, 1), (1, 2)]
    assert threshold_graph(m, 0).m == 0
    assert threshold_graph(m, m.diameter()) == Graph.complete(3)


def test_threshold_graph_restricted_keeps_ids():
    m = line_metric([0, 1, 2, 3])
    g = threshold_graph(m, 1, [1, 2, 3])
    assert g.n == 4 and g.edges() == [(1, 2), (2, 3)]


@given(point_metrics(), st.floats(0, 1.5), st.floats(0, 1.5))
def test_threshold_graph_is_monotone(m, a, b):
    lo, hi = sorted((a, b))
    small, big = threshold_graph(m, lo), threshold_graph(m, hi)
    assert set(small.edges()) <= set(big.edges())


def test_aspect_ratio_examples():
    m = line_metric([0, 1, 4])
    assert aspect_ratio(m, [0, 1]) == 1.0
    assert aspect_ratio(m, None) == 4.0
    with pytest.raises(UndefinedAspectRatio):
        aspect_ratio(m, [2])


def test_growth_bound_examples():
    square = MetricSpace.from_points([[0, 0], [1, 0], [0, 1], [1, 1]])
    assert growth_bound_check(square, None, 2.0)
    five = line_metric([0, 1, 2, 3, 4])
    assert growth_bound_check(five, None, 2.0)
    # at aspect ratio 1 the bound is 2^0 = 1, so any two-point set fails literally
    assert not growth_bound_check(line_metric([0, 1]), None, 2.0)


def _max_independent(dist, r, ids):
    best: list[int] = []

    def grow(chosen, rest):
        nonlocal best
        if len(chosen) + len(rest) <= len(best):
            return
        if not rest:
            best = chosen
            return
        v, tail = rest[0], rest[1:]
        grow(chosen + [v], [u for u in tail if dist[v, u] > r])
        grow(chosen, tail)

    grow([], list(ids))
    return best


@pytest.mark.parametrize("dim", [1, 2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_independent_sets_in_balls_are_growth_bounded(dim, seed):
    inst = generate(InstanceSpec("euclidean", 64, seed, dim=dim))
    d = inst.metric.dist
    r = 0.15
    for v in range(0, 64, 8):
        ball = np.flatnonzero(d[v] <= 2 * r)
        best = _max_independent(d, r, ball.tolist())
        # two-point sets hit the aspect-ratio-1 degenerate case covered above
        if len(best) >= 3:
            assert growth_bound_check(inst.metric, best, 2.0 * dim)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_generated_metrics_satisfy_axioms(dim):
    for seed in range(3):
        m = generate(InstanceSpec("euclidean", 256 if seed == 0 else 40, seed, dim=dim)).metric
        assert check_metric(m)


def test_metric_rejects_bad_matrices():
    with pytest.raises(ValueError):
        MetricSpace([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        MetricSpace([[1, 1], [1, 0]])
    assert not check_metric(MetricSpace([[0, 1, 5], [1, 0, 1], [5, 1, 0]]))


def test_generate_is_deterministic():
    a = generate(InstanceSpec("euclidean", 4, seed=7))
    b = generate(InstanceSpec("euclidean", 4, seed=7))
    assert a.to_json() == b.to_json()
    assert generate(InstanceSpec("euclidean", 4, seed=8)).to_json() != a.to_json()


def test_gnp_extremes():
    assert generate(InstanceSpec("gnp", 10, p=1.0)).graph == Graph.complete(10)
    assert generate(InstanceSpec("gnp", 10, p=0.0)).graph.m == 0


def test_instance_json_round_trip():
    for kind in ("euclidean", "gnp"):
        inst = generate(InstanceSpec(kind, 12, seed=2, p=0.3))
        data = json.loads(inst.to_json())
        assert set(data) >= {"kind", "n", "seed", "params", "facility_costs"}
        back = Instance.from_dict(data)
        assert back.to_json() == inst.to_json()


def test_costs_follow_the_configured_range():
    costs = generate(InstanceSpec("euclidean", 500, seed=1)).costs
    assert costs.min() >= 0.1 and costs.max() <= 2.0


def test_gnp_has_no_metric():
    with pytest.raises(NotMetricError):
        generate(InstanceSpec("gnp", 5)).require_metric()


@pytest.mark.parametrize(
    "kwargs", [dict(kind="grid", n=3), dict(kind="gnp", n=0), dict(kind="gnp", n=3, p=1.5), dict(kind="euclidean", n=3, dim=0)]
)
def test_invalid_specs(kwargs):
    with pytest.raises(ConfigError):
        InstanceSpec(**kwargs)


def test_bfs_distance_examples():
    assert bfs_distance(Graph.path(3), 0).tolist() == [0, 1, 2]
    assert bfs_distance(Graph.empty(3), 0).tolist() == [0, np.inf, np.inf]
    assert bfs_distance(Graph.complete(4), 2).tolist() == [1, 1, 0, 1]


def test_graph_basics():
    g = Graph(5, [0, 1, 1, 3], [1, 2, 2, 4])
    assert g.m == 3
    assert g.neighbors(1).tolist() == [0, 2]
    assert g.has_edge(2, 1) and not g.has_edge(0, 4)
    assert g.degree_within([0, 1]).tolist() == [1, 1, 1, 0, 0]
    assert g.closed_neighborhood([0]).tolist() == [True, True, False, False, False]
    with pytest.raises(ValueError):
        Graph(3, [1], [1])
