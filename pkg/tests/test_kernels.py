"""The compiled kernels and their numpy fallbacks must agree exactly."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cclique import kernels
from cclique.metric import Graph

from .strategies import graphs


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return Graph(n, iu[keep], iv[keep])


@pytest.mark.parametrize("seed", range(5))
def test_pairwise_paths_bit_identical(seed):
    pts = np.random.default_rng(seed).random((40, 3))
    fast = kernels._pairwise_euclidean_loop(pts)
    slow = kernels._pairwise_euclidean_np(pts)
    assert np.array_equal(fast, slow)
    assert np.array_equal(kernels.pairwise_euclidean(pts), slow)


@given(graphs(), st.integers(0, 2**16))
def test_greedy_and_local_min_mis_agree(g, seed):
    active = np.random.default_rng(seed).random(g.n) < 0.8
    greedy = kernels._greedy_mis_loop(g.indptr, g.indices, active.copy())
    loop_mis, loop_rounds = kernels._local_min_mis_loop(g.indptr, g.indices, active.copy())
    np_mis, np_rounds = kernels._local_min_mis_np(g.indptr, g.indices, active.copy())
    assert np.array_equal(greedy, loop_mis)
    assert np.array_equal(greedy, np_mis)
    assert loop_rounds == np_rounds
    assert np.array_equal(kernels.greedy_mis(g.indptr, g.indices, active), greedy)


@given(graphs(), st.integers(0, 2**16))
def test_bfs_paths_agree(g, seed):
    rng = np.random.default_rng(seed)
    src = rng.random(g.n) < 0.2
    act = rng.random(g.n) < 0.9
    a = kernels._bfs_loop(g.indptr, g.indices, src, act)
    b = kernels._bfs_np(g.indptr, g.indices, src, act)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("seed", range(5))
def test_prim_paths_agree(seed):
    pts = np.random.default_rng(seed).random((30, 2))
    d = kernels.pairwise_euclidean(pts)
    a = kernels._prim_loop(d)
    b = kernels._prim_np(d)
    wa = sum(d[i, a[i]] for i in range(1, 30))
    wb = sum(d[i, b[i]] for i in range(1, 30))
    assert wa == pytest.approx(wb, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_radius_paths_agree(seed):
    rng = np.random.default_rng(seed)
    d = kernels.pairwise_euclidean(rng.random((25, 2)))
    f = rng.uniform(0.05, 2.0, 25)
    assert np.allclose(kernels._mp_radii_loop(d, f), kernels._mp_radii_np(d, f), rtol=1e-12, atol=0)


def test_kruskal_and_union_find():
    u = np.array([0, 1, 0, 2])
    v = np.array([1, 2, 2, 3])
    keep = kernels.kruskal_select(4, u, v)
    assert keep.tolist() == [True, True, False, True]
    labels = kernels.union_find_labels(5, np.array([3, 1]), np.array([4, 2]))
    assert labels.tolist() == [0, 1, 1, 3, 3]


def test_env_flag_selects_fallback(tmp_path):
    code = (
        "import numpy as np\n"
        "from cclique import kernels\n"
        "pts = np.random.default_rng(1).random((20, 2))\n"
        "print(kernels.HAS_NUMBA, float(kernels.pairwise_euclidean(pts).sum()).hex())\n"
    )
    env = dict(os.environ, CCLIQUE_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    flag, total = out.stdout.split()
    assert flag == "False"
    pts = np.random.default_rng(1).random((20, 2))
    assert float.fromhex(total) == float(kernels.pairwise_euclidean(pts).sum())
