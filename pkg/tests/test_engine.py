import json

import numpy as np
import pytest

from cclique import (
    BandwidthViolation,
    Clique,
    CoinSource,
    CostLedger,
    Envelope,
    RoutingBatch,
    RoutingCapacityExceeded,
    SimConfig,
)
from cclique.engine import word_bits


def test_every_node_broadcasts_one_word():
    c = Clique(8)
    view = c.broadcast_round({v: v for v in range(8)})
    assert c.ledger.rounds == 1
    assert view[3] == {v: v for v in range(8) if v != 3}
    assert c.ledger.messages == 8 * 7


def test_direct_round_delivers_and_counts():
    c = Clique(4)
    out = c.direct_round({0: {1: 3, 2: 1}, 3: {1: 2}})
    assert out == {1: {0: (3,), 3: (2,)}, 2: {0: (1,)}}
    assert (c.ledger.rounds, c.ledger.messages) == (1, 3)


def test_oversized_payload_is_rejected():
    c = Clique(8)
    with pytest.raises(BandwidthViolation):
        c.direct_round({0: {1: (1, 2)}})


def test_wider_bandwidth_accepts_two_words():
    c = Clique(8, SimConfig(bandwidth_words=2))
    assert c.direct_round({0: {1: (1, 2)}}) == {1: {0: (1, 2)}}


def test_empty_direct_round_still_counts():
    c = Clique(5)
    assert c.direct_round({}) == {}
    assert c.ledger.rounds == 1 and c.ledger.messages == 0


def test_self_send_and_word_range():
    c = Clique(8)
    with pytest.raises(BandwidthViolation):
        c.direct_round({2: {2: 1}})
    with pytest.raises(BandwidthViolation):
        c.direct_round({0: {1: 8}})  # 3-bit words hold 0..7
    with pytest.raises(BandwidthViolation):
        c.direct_array([0, 0], [1, 1], [1, 1])


def test_lenzen_within_capacity():
    c = Clique(8)
    src = np.repeat(np.arange(8), 8)
    dst = np.tile(np.arange(8), 8)
    out = c.lenzen_route(RoutingBatch(src, dst))
    assert len(out) == 64
    assert c.ledger.rounds == 2
    assert c.ledger.messages == 56  # self-addressed envelopes stay local


def test_lenzen_destination_overflow_names_node():
    c = Clique(8)
    batch = RoutingBatch(np.arange(9) % 7 + 1, np.zeros(9, dtype=int))
    with pytest.raises(RoutingCapacityExceeded) as err:
        c.lenzen_route(batch)
    assert err.value.node == 0 and err.value.direction == "destination"


def test_lenzen_source_overflow():
    c = Clique(8)
    with pytest.raises(RoutingCapacityExceeded) as err:
        c.lenzen_route(RoutingBatch(np.full(9, 2), [0, 1, 3, 4, 5, 6, 7, 0, 1]))
    assert err.value.direction == "source" and err.value.node == 2


def test_empty_batch_is_charged():
    c = Clique(8, SimConfig(lenzen_rounds=3))
    assert len(c.lenzen_route(RoutingBatch.empty())) == 0
    assert c.ledger.rounds == 3


def test_lenzen_returns_lexicographic_order():
    c = Clique(4)
    batch = RoutingBatch.from_envelopes([Envelope(2, 1, (7,)), Envelope(0, 3, (5,)), Envelope(2, 0, (6,)), Envelope(0, 3, (4,))])
    out = c.lenzen_route(batch).envelopes()
    assert [(e.src, e.dst, e.payload) for e in out] == [(0, 3, (5,)), (0, 3, (4,)), (2, 0, (6,)), (2, 1, (7,))]


def test_route_bulk_splits_into_invocations():
    c = Clique(8)
    batch = RoutingBatch(np.arange(1, 8).repeat(4), np.zeros(28, dtype=int))
    c.route_bulk(batch)
    assert c.ledger.rounds == 2 * 4  # 28 envelopes into node 0 at 8 per call
    assert c.ledger.messages == 28
    with pytest.raises(RoutingCapacityExceeded):
        Clique(8).route_bulk(batch, max_invocations=2)


def test_single_and_silent_broadcast():
    c = Clique(6)
    view = c.broadcast_round({4: 1})
    assert all(view[v] == {4: 1} for v in range(6) if v != 4)
    c.broadcast_round({})
    assert c.ledger.rounds == 2


def test_ledger_phases_and_json():
    c = Clique(4)
    with c.phase("a"):
        c.idle_round()
        with c.phase("b"):
            c.broadcast_round({0: 1})
    c.idle_round()
    d = json.loads(c.ledger.to_json())
    assert d["rounds"] == 3
    assert [p["label"] for p in d["phases"]] == ["a", "a/b", "main"]
    assert sum(p["rounds"] for p in d["phases"]) == d["rounds"]
    assert CostLedger.from_dict(d) == c.ledger


def test_parallel_absorb_max_and_sum():
    base = Clique(8)
    forks = [base.fork(f"x{i}") for i in range(3)]
    for i, f in enumerate(forks):
        for _ in range(i + 1):
            f.idle_round()
    assert base.absorb_parallel([f.ledger for f in forks], "max") == 3
    assert base.absorb_parallel([f.ledger for f in forks], "sum") == 6


def test_coins_are_per_label_and_reproducible():
    a, b = CoinSource(5), CoinSource(5)
    assert np.array_equal(a.uniform("x", 10, 2), b.uniform("x", 10, 2))
    assert not np.array_equal(a.uniform("x", 10), a.uniform("y", 10))
    assert not np.array_equal(CoinSource(6).uniform("x", 10), a.uniform("x", 10))
    # rows belong to nodes: a larger network does not reshuffle earlier rows
    assert np.array_equal(a.uniform("x", 10, 3)[:4], a.uniform("x", 4, 3))


def test_word_bits():
    assert [word_bits(n) for n in (1, 2, 3, 8, 9, 1024)] == [1, 1, 2, 3, 4, 10]
