import numpy as np
import pytest
from hypothesis import given

from cclique import BudgetInfeasible, Clique, InstanceSpec, MetricSpace, RoutingCapacityExceeded, SimConfig, generate
from cclique.mst import (
    check_cut_preservation,
    check_layer_structure,
    check_light_connectivity,
    layer_count,
    layer_degree_bound,
    light_sparsify,
    mst_approximation,
    mst_sparse,
    schedule_parallel_mis,
    split_edges,
)
from cclique.oracles import exact_mst, prim_mst_weight

from .conftest import line_metric
from .strategies import point_metrics


def test_split_example():
    u, v, d_m = split_edges(line_metric([0, 1, 100, 200]), Clique(4))
    assert d_m == 200
    assert list(zip(u.tolist(), v.tolist())) == [(0, 1)]


def test_split_equal_distances_has_no_light_pairs():
    d = np.ones((5, 5)) - np.eye(5)
    u, _, d_m = split_edges(MetricSpace(d), Clique(5))
    assert u.size == 0 and d_m == 1.0


def test_split_costs_one_broadcast():
    c = Clique(6)
    split_edges(line_metric(np.arange(6.0)), c)
    assert c.ledger.rounds == 1 and c.ledger.messages == 6 * 5


def test_single_point_gives_empty_tree():
    tree, sp, plan = mst_approximation(line_metric([0.0]), Clique(1))
    assert len(tree) == 0 and sp.d_m == 0.0 and plan is None


def test_layer_count_and_smallest_radius():
    assert layer_count(16, 2.0) == 12
    tree, sp, _ = mst_approximation(generate(InstanceSpec("euclidean", 16, seed=0)).metric, Clique(16))
    assert sp.h == 12
    assert sp.r0 == pytest.approx(sp.d_m / 4096)
    assert sp.delta == 4
    assert len(sp.layers) == 12


def test_light_pair_at_exact_threshold():
    # n=3 on a line: d_m = 1, threshold d_m/n^2 = 1/9
    m = line_metric([0, 1 / 9, 1])
    u, v, S = light_sparsify(m, 1.0, Clique(3))
    assert S.tolist() == [True, False, True]
    assert (0, 1) in set(zip(u.tolist(), v.tolist()))


def test_mst_sparse_triangle():
    tree = mst_sparse(3, [0, 1, 0], [1, 2, 2], [1.0, 1.0, 2.0], Clique(3))
    assert tree.total_weight == 2.0 and tree.spanning


def test_mst_sparse_tree_is_returned_verbatim():
    u, v, w = [0, 1, 2], [1, 2, 3], [3.0, 1.0, 2.0]
    tree = mst_sparse(4, u, v, w, Clique(4))
    assert sorted(tree.edges) == sorted(zip(u, v, w))


def test_mst_sparse_disconnected_is_flagged():
    tree = mst_sparse(4, [0, 2], [1, 3], [1.0, 1.0], Clique(4))
    assert not tree.spanning and len(tree) == 2


def test_mst_sparse_charges_spread_rounds():
    c = Clique(4)
    mst_sparse(4, [0, 1, 2], [1, 2, 3], [1.0, 1.0, 1.0], c)
    lenzen = c.config.lenzen_rounds
    assert c.ledger.rounds == lenzen + 2


def test_mst_sparse_budget_exhausted():
    n = 5
    u, v = np.triu_indices(n, 1)
    c = Clique(n, SimConfig(sparse_budget=1))
    with pytest.raises(RoutingCapacityExceeded):
        mst_sparse(n, u, v, np.ones(u.size), c)


def test_two_points_ratio_one():
    m = line_metric([0, 3])
    tree, _, _ = mst_approximation(m, Clique(2))
    assert tree.edges == [(0, 1, 3.0)]


def test_collinear_points():
    m = line_metric(np.arange(40.0))
    tree, sp, _ = mst_approximation(m, Clique(40))
    exact = exact_mst(m).total_weight
    assert exact == 39.0
    assert 1.0 <= tree.total_weight / exact <= 12


def test_schedule_examples():
    plan = schedule_parallel_mis(1024, 12)
    assert plan.receivers_needed == 240 and plan.feasible
    assert len(set(plan.offsets)) == 12 and plan.offsets[1] == 20
    assert plan.membership_words == 2  # 12 bits over 10-bit words
    assert schedule_parallel_mis(1024, 12, word_bits=64).membership_words == 1
    with pytest.raises(BudgetInfeasible):
        schedule_parallel_mis(100, 12)


def test_small_networks_fall_back_to_sum_charging():
    m = generate(InstanceSpec("euclidean", 64, seed=1)).metric
    c = Clique(64)
    _, _, plan = mst_approximation(m, c)
    assert plan.charge == "sum" and not plan.feasible


@pytest.mark.parametrize("seed", range(3))
def test_pipeline_checks_on_plane(seed):
    n = 256
    m = generate(InstanceSpec("euclidean", n, seed=seed)).metric
    c = Clique(n, seed=seed)
    tree, sp, _ = mst_approximation(m, c)
    exact = prim_mst_weight(m)
    assert tree.spanning
    assert 1.0 - 1e-12 <= tree.total_weight / exact <= 12
    assert sp.size <= 50 * n
    assert check_light_connectivity(m, sp)
    assert check_cut_preservation(m, sp)
    assert all(check_layer_structure(m, sp, c.config.rho))
    lw = m.dist[sp.light_u, sp.light_v].sum()
    assert lw <= 2 * sp.d_m
    assert {ph.split("/")[0] for ph in c.ledger.phases} == {"split", "light", "heavy", "sparse"}


def test_layer_degree_bound_default():
    assert layer_degree_bound(5.0, 2.0) == 256


@given(point_metrics(min_n=2, max_n=20))
def test_pipeline_property(m):
    tree, sp, _ = mst_approximation(m, Clique(m.n))
    exact = exact_mst(m).total_weight
    assert tree.spanning
    assert tree.total_weight >= exact * (1 - 1e-12)
    assert check_cut_preservation(m, sp)
