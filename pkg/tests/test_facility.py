import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cclique import Clique, InstanceSpec, MetricSpace, generate
from cclique.facility import class_graph, classify, compute_radii, solve_mfl
from cclique.oracles import brute_force_mfl

from .conftest import line_metric
from .strategies import point_metrics


def test_radius_of_isolated_node():
    m = line_metric([0, 100])
    assert compute_radii(m, [3.0, 3.0]).tolist() == pytest.approx([3.0, 3.0])


def test_radius_with_one_near_neighbour():
    m = line_metric([0, 1])
    assert compute_radii(m, [3.0, 3.0]).tolist() == pytest.approx([2.0, 2.0])


def test_radius_vanishes_with_cost():
    m = line_metric([0, 1, 5])
    r = compute_radii(m, [1e-9, 1.0, 1.0])
    assert r[0] == pytest.approx(1e-9)


def test_radii_reject_bad_costs():
    m = line_metric([0, 1])
    with pytest.raises(ValueError):
        compute_radii(m, [0.0, 1.0])
    with pytest.raises(ValueError):
        compute_radii(m, [1.0])


@given(point_metrics(min_n=1, max_n=12), st.floats(0.01, 5.0))
def test_radius_solves_its_equation(m, f):
    r = compute_radii(m, np.full(m.n, f))
    lhs = np.clip(r[:, None] - m.dist, 0, None).sum(axis=1)
    assert lhs == pytest.approx(np.full(m.n, f), rel=1e-9)


def test_classify_examples():
    assert classify([1.0, 2.0, 9.0]).classes.tolist() == [0, 0, 2]
    assert classify([2.0, 2.0, 2.0]).classes.tolist() == [0, 0, 0]
    assert classify([1.0, 3.0]).classes.tolist() == [0, 1]
    assert classify([0.5, 1.5, 4.5, 13.5]).classes.tolist() == [0, 1, 2, 3]


def test_class_graph_boundary_and_singletons():
    m = line_metric([0, 2, 10])
    prof = classify(np.array([1.0, 1.0, 1.0]))
    H = class_graph(m, prof, 0)
    assert H.edges() == [(0, 1)]
    prof = classify(np.array([1.0, 5.0, 1.0]))
    assert class_graph(m, prof, 1).m == 0


def test_single_node():
    res = solve_mfl(line_metric([0.0]), [5.0], Clique(1))
    assert res.open.tolist() == [0] and res.cost == 5.0


def test_two_nodes_cheap_one_opens():
    m = line_metric([0, 0.01])
    f = np.array([0.01, 0.02])
    res = solve_mfl(m, f, Clique(2))
    assert res.profile.classes.tolist() == [0, 0]
    assert res.open.tolist() == [0]
    assert res.cost == pytest.approx(brute_force_mfl(m, f).cost)


def test_far_apart_costs_land_in_separate_classes():
    m = line_metric([0, 0.1])
    res = solve_mfl(m, np.array([10.0, 0.01]), Clique(2))
    assert res.profile.num_classes == 2
    assert res.open.tolist() == [0, 1]


def test_unknown_mode():
    with pytest.raises(ValueError):
        solve_mfl(line_metric([0, 1]), [1, 1], Clique(2), mode="greedy")


@pytest.mark.parametrize("mode", ["general", "doubling"])
def test_classes_run_in_parallel_and_verify(mode):
    n = 64
    m = generate(InstanceSpec("euclidean", n, seed=3)).metric
    f = np.random.default_rng(3).uniform(0.01, 0.2, n)
    c = Clique(n, seed=3)
    res = solve_mfl(m, f, c, mode)
    assert all(res.reports)
    ids = np.concatenate(list(res.class_sets.values()))
    assert np.unique(ids).size == ids.size
    assert {ph.split("/")[0] for ph in c.ledger.phases} == {"radii", "classes", "assign"}
    assert sorted(res.open.tolist()) == sorted(ids.tolist())


@pytest.mark.parametrize("mode", ["general", "doubling"])
def test_scaling_covariance(mode):
    n = 40
    pts = np.random.default_rng(5).random((n, 2))
    m = MetricSpace.from_points(pts)
    f = np.random.default_rng(6).uniform(0.05, 0.5, n)
    a = solve_mfl(m, f, Clique(n, seed=1), mode)
    b = solve_mfl(m.scaled(7.0), 7.0 * f, Clique(n, seed=1), mode)
    assert np.array_equal(a.profile.classes, b.profile.classes)
    assert np.array_equal(a.open, b.open)
    assert b.cost == pytest.approx(7.0 * a.cost, rel=1e-9)


@given(point_metrics(min_n=1, max_n=9), st.integers(0, 99), st.sampled_from(["general", "doubling"]))
def test_never_beats_the_optimum(m, seed, mode):
    f = np.random.default_rng(seed).uniform(0.05, 1.0, m.n)
    res = solve_mfl(m, f, Clique(m.n, seed=seed), mode)
    opt = brute_force_mfl(m, f).cost
    assert res.open.size >= 1
    assert res.cost >= opt * (1 - 1e-12)
    assert res.cost <= 20 * opt
