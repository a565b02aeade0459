"""Round-synchronous congested-clique simulator with cost accounting.

A :class:`Clique` owns the n nodes of one simulated run. Algorithms talk to
it through three primitives:

* :meth:`Clique.direct_round` - one synchronous round, at most one payload
  of ``bandwidth_words`` words per ordered pair;
* :meth:`Clique.broadcast_round` - one round in which some nodes send the
  same word to everybody;
* :meth:`Clique.lenzen_route` - the Information Distribution Task, charged
  as a flat ``lenzen_rounds`` per invocation after checking the n-per-source
  and n-per-destination capacity.

Local computation is free. All coins come from :class:`CoinSource`, keyed by
(root seed, phase label), so a run is a pure function of
(instance, seed, config).
"""
from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Iterable, Mapping
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig
from .errors import BandwidthViolation, RoutingCapacityExceeded

__all__ = [
    "CostLedger",
    "Envelope",
    "RoutingBatch",
    "CoinSource",
    "Clique",
    "word_bits",
]


def word_bits(n: int) -> int:
    """Bits in one message word: ceil(log2 n), at least 1."""
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


@dataclass
class CostLedger:
    rounds: int = 0
    messages: int = 0
    phases: dict[str, list[int]] = field(default_factory=dict)

    def charge(self, label: str, rounds: int, messages: int) -> None:
        if rounds < 0 or messages < 0:
            raise ValueError("ledger charges must be non-negative")
        self.rounds += rounds
        self.messages += messages
        slot = self.phases.setdefault(label, [0, 0])
        slot[0] += rounds
        slot[1] += messages

    def phase_rounds(self, label: str) -> int:
        return self.phases.get(label, [0, 0])[0]

    def phase_messages(self, label: str) -> int:
        return self.phases.get(label, [0, 0])[1]

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "messages": self.messages,
            "phases": [
                {"label": k, "rounds": r, "messages": m} for k, (r, m) in self.phases.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: Mapping) -> "CostLedger":
        led = cls()
        for ph in data.get("phases", []):
            led.charge(ph["label"], int(ph["rounds"]), int(ph["messages"]))
        if led.rounds != data["rounds"] or led.messages != data["messages"]:
            raise ValueError("phase totals do not add up to ledger totals")
        return led


@dataclass(frozen=True)
class Envelope:
    src: int
    dst: int
    payload: tuple = ()


class RoutingBatch:
    """A multiset of envelopes held column-wise.

    ``payload`` is an ``(m, w)`` integer array (``w`` may be 0). An
    envelope carries one O(log n)-bit message, which fits up to two node ids
    (one edge).
    """

    __slots__ = ("src", "dst", "payload")

    MAX_IDS = 2

    def __init__(self, src, dst, payload=None):
        self.src = np.asarray(src, dtype=np.int64).reshape(-1)
        self.dst = np.asarray(dst, dtype=np.int64).reshape(-1)
        if self.src.shape != self.dst.shape:
            raise ValueError("src and dst must have equal length")
        if payload is None:
            payload = np.zeros((self.src.size, 0), dtype=np.int64)
        payload = np.asarray(payload, dtype=np.int64)
        if payload.ndim == 1:
            payload = payload.reshape(-1, 1)
        if payload.shape[0] != self.src.size:
            raise ValueError("payload rows must match envelope count")
        if payload.shape[1] > self.MAX_IDS:
            raise ValueError(f"an envelope carries at most {self.MAX_IDS} ids")
        self.payload = payload

    def __len__(self) -> int:
        return int(self.src.size)

    @classmethod
    def empty(cls, width: int = 0) -> "RoutingBatch":
        return cls(np.zeros(0), np.zeros(0), np.zeros((0, width)))

    @classmethod
    def from_envelopes(cls, envelopes: Iterable[Envelope]) -> "RoutingBatch":
        envs = list(envelopes)
        width = max((len(e.payload) for e in envs), default=0)
        pay = np.full((len(envs), width), -1, dtype=np.int64)
        for i, e in enumerate(envs):
            pay[i, : len(e.payload)] = e.payload
        return cls([e.src for e in envs], [e.dst for e in envs], pay)

    @classmethod
    def concat(cls, batches: Iterable["RoutingBatch"]) -> "RoutingBatch":
        bs = [b for b in batches if len(b)]
        if not bs:
            return cls.empty()
        width = max(b.payload.shape[1] for b in bs)
        pays = []
        for b in bs:
            p = b.payload
            if p.shape[1] < width:
                p = np.hstack([p, np.full((len(b), width - p.shape[1]), -1, dtype=np.int64)])
            pays.append(p)
        return cls(
            np.concatenate([b.src for b in bs]),
            np.concatenate([b.dst for b in bs]),
            np.vstack(pays),
        )

    def order(self) -> np.ndarray:
        """Global lexicographic order by (src, dst, index)."""
        return np.lexsort((np.arange(len(self)), self.dst, self.src))

    def take(self, idx) -> "RoutingBatch":
        return RoutingBatch(self.src[idx], self.dst[idx], self.payload[idx])

    def envelopes(self) -> list[Envelope]:
        return [
            Envelope(int(s), int(d), tuple(int(x) for x in p))
            for s, d, p in zip(self.src, self.dst, self.payload)
        ]

    def to(self, node: int) -> np.ndarray:
        """Payload rows addressed to ``node``."""
        return self.payload[self.dst == node]


def _label_words(label: str) -> list[int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


class CoinSource:
    """Deterministic randomness keyed by (root seed, label[, node]).

    ``uniform(label, n, k)`` returns an ``(n, k)`` array whose row ``v`` is
    node ``v``'s private coins for that phase: rows never depend on which
    other nodes flip, and distinct labels give independent streams.
    """

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)

    def generator(self, label: str, node: int | None = None) -> np.random.Generator:
        key = [self.seed, *_label_words(label)]
        if node is not None:
            key.append(int(node) + 1)
        return np.random.default_rng(np.random.SeedSequence(key))

    def uniform(self, label: str, n: int, k: int | None = None) -> np.ndarray:
        shape = (n,) if k is None else (n, k)
        return self.generator(label).random(shape)


class Clique:
    """The simulated n-node congested clique of one run."""

    def __init__(self, n: int, config: SimConfig | None = None, seed: int = 0, *, prefix: str = ""):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = int(n)
        self.config = config or SimConfig()
        self.seed = int(seed)
        self.coins = CoinSource(seed)
        self.ledger = CostLedger()
        self.prefix = prefix
        self._phase = "main"
        self.bits = word_bits(self.n)
        # (max envelopes from one source, max envelopes to one destination) per routing call
        self.routing_log: list[tuple[int, int]] = []

    # ---------------------------------------------------------------- phases
    @property
    def current_phase(self) -> str:
        return self._phase

    @contextmanager
    def phase(self, label: str):
        """Charge to ``label`` inside the block; nested blocks read ``outer/inner``."""
        prev = self._phase
        self._phase = label if prev == "main" else f"{prev}/{label}"
        try:
            yield self
        finally:
            self._phase = prev

    def charge(self, rounds: int, messages: int = 0) -> None:
        self.ledger.charge(self._phase, rounds, messages)

    def uniform(self, label: str, k: int | None = None) -> np.ndarray:
        return self.coins.uniform(self.prefix + label, self.n, k)

    def fork(self, prefix: str) -> "Clique":
        """A sibling run on the same nodes with a fresh ledger.

        Used for sub-computations that execute in parallel; their costs come
        back through :meth:`absorb_parallel`.
        """
        return Clique(self.n, self.config, self.seed, prefix=self.prefix + prefix + "/")

    def absorb_parallel(self, ledgers: Iterable[CostLedger], mode: str | None = None) -> int:
        """Charge a block of logically parallel executions; returns rounds charged.

        ``mode='max'`` charges the slowest branch, ``'sum'`` charges them as
        if run back to back. Messages always add up.
        """
        mode = mode or self.config.parallel_charge
        leds = list(ledgers)
        rs = [ld.rounds for ld in leds]
        rounds = (max(rs) if rs else 0) if mode == "max" else sum(rs)
        self.charge(rounds, sum(ld.messages for ld in leds))
        return rounds

    # ------------------------------------------------------------ validation
    def _check_words(self, words: np.ndarray) -> None:
        w = np.asarray(words)
        if w.size == 0 or w.dtype.kind in "fb":
            return
        if w.dtype.kind not in "iu":
            raise BandwidthViolation(f"unsupported word type {w.dtype}")
        if w.min() < 0 or w.max() >= (1 << self.bits):
            raise BandwidthViolation(f"word does not fit in {self.bits} bits")

    def _check_ids(self, ids: np.ndarray, what: str) -> None:
        if ids.size and (ids.min() < 0 or ids.max() >= self.n):
            raise ValueError(f"{what} id out of range [0, {self.n})")

    # ------------------------------------------------------------ primitives
    def direct_array(self, src, dst, words) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """One synchronous round from column arrays; ``words`` is ``(m, w)``.

        Returns the delivered ``(src, dst, words)`` unchanged in content.
        """
        src = np.asarray(src, dtype=np.int64).reshape(-1)
        dst = np.asarray(dst, dtype=np.int64).reshape(-1)
        words = np.asarray(words)
        if words.ndim == 1:
            words = words.reshape(-1, 1)
        if words.shape[0] != src.size or dst.size != src.size:
            raise ValueError("src, dst and words must align")
        self._check_ids(src, "source")
        self._check_ids(dst, "destination")
        if np.any(src == dst):
            raise BandwidthViolation("a node cannot send to itself")
        if words.shape[1] > self.config.bandwidth_words:
            raise BandwidthViolation(
                f"payload of {words.shape[1]} words exceeds B={self.config.bandwidth_words}"
            )
        key = src * self.n + dst
        if np.unique(key).size != key.size:
            raise BandwidthViolation("a link carries more than one payload this round")
        self._check_words(words)
        self.charge(1, int(src.size))
        return src, dst, words

    def direct_round(self, sends: Mapping[int, Mapping[int, object]]) -> dict[int, dict[int, tuple]]:
        """One round; ``sends[src][dst]`` is a word or a tuple of words."""
        src, dst, payloads = [], [], []
        for s, row in sends.items():
            for d, p in row.items():
                p = tuple(p) if isinstance(p, (tuple, list)) else (p,)
                if len(p) > self.config.bandwidth_words:
                    raise BandwidthViolation(
                        f"payload {s}->{d} has {len(p)} words, B={self.config.bandwidth_words}"
                    )
                src.append(s)
                dst.append(d)
                payloads.append(p)
        for p in payloads:
            self._check_words(np.asarray(p))
        width = max((len(p) for p in payloads), default=0)
        dummy = np.zeros((len(src), min(width, self.config.bandwidth_words)), dtype=np.int64)
        self.direct_array(src, dst, dummy)
        out: dict[int, dict[int, tuple]] = {}
        for s, d, p in zip(src, dst, payloads):
            out.setdefault(d, {})[s] = p
        return out

    def broadcast_array(self, ids, words) -> np.ndarray:
        """Nodes ``ids`` each send one word to every other node; one round."""
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        words = np.asarray(words).reshape(-1)
        if ids.size != words.size:
            raise ValueError("one word per broadcasting node")
        self._check_ids(ids, "sender")
        if np.unique(ids).size != ids.size:
            raise BandwidthViolation("a node broadcasts at most one word per round")
        self._check_words(words)
        self.charge(1, int(ids.size) * (self.n - 1))
        return words

    def broadcast_round(self, values: Mapping[int, object]) -> "BroadcastView":
        ids = np.fromiter(values.keys(), dtype=np.int64, count=len(values))
        words = [values[int(i)] for i in ids]
        if any(isinstance(w, (tuple, list)) for w in words):
            raise BandwidthViolation("broadcast carries a single word")
        self.broadcast_array(ids, np.asarray(words) if words else np.zeros(0, dtype=np.int64))
        return BroadcastView(self.n, dict(zip(ids.tolist(), words)))

    def idle_round(self) -> None:
        self.charge(1, 0)

    def lenzen_route(self, batch: RoutingBatch) -> RoutingBatch:
        """Deliver ``batch`` in one Information-Distribution invocation.

        Self-addressed envelopes are local knowledge: delivered, never
        counted. Returns the delivered envelopes in (src, dst, index) order.
        """
        self._check_ids(batch.src, "source")
        self._check_ids(batch.dst, "destination")
        remote = batch.src != batch.dst
        src, dst = batch.src[remote], batch.dst[remote]
        self._check_capacity(src, dst)
        self.routing_log.append(
            (int(np.bincount(src).max()) if src.size else 0, int(np.bincount(dst).max()) if dst.size else 0)
        )
        self.charge(self.config.lenzen_rounds, int(remote.sum()))
        return batch.take(batch.order())

    def _check_capacity(self, src: np.ndarray, dst: np.ndarray) -> None:
        if src.size == 0:
            return
        per_src = np.bincount(src, minlength=self.n)
        per_dst = np.bincount(dst, minlength=self.n)
        if per_src.max() > self.n:
            v = int(np.argmax(per_src))
            raise RoutingCapacityExceeded(v, "source", int(per_src[v]), self.n)
        if per_dst.max() > self.n:
            v = int(np.argmax(per_dst))
            raise RoutingCapacityExceeded(v, "destination", int(per_dst[v]), self.n)

    def route_bulk(self, batch: RoutingBatch, max_invocations: int | None = None) -> RoutingBatch:
        """Deliver an O(n)-per-node batch through several routing invocations.

        Envelopes are split by per-source rank and then per-destination rank
        into sub-batches that each respect the capacity; each sub-batch is
        one :meth:`lenzen_route`. Raises :class:`RoutingCapacityExceeded`
        if more than ``max_invocations`` would be needed.
        """
        self._check_ids(batch.src, "source")
        self._check_ids(batch.dst, "destination")
        ordered = batch.take(batch.order())
        remote = ordered.src != ordered.dst
        rsrc, rdst = ordered.src[remote], ordered.dst[remote]
        if rsrc.size == 0:
            self.lenzen_route(RoutingBatch.empty())
            return ordered
        n = self.n
        src_rank = _rank_within(rsrc)
        chunk_s = src_rank // n
        key = chunk_s * n + rdst
        dst_rank = _rank_within(key)
        chunk = chunk_s * (int(dst_rank.max()) // n + 1) + dst_rank // n
        uniq = np.unique(chunk)
        if max_invocations is not None and uniq.size > max_invocations:
            per_src = np.bincount(rsrc, minlength=n)
            per_dst = np.bincount(rdst, minlength=n)
            if per_dst.max() >= per_src.max():
                v = int(np.argmax(per_dst))
                raise RoutingCapacityExceeded(v, "destination", int(per_dst[v]), n * max_invocations)
            v = int(np.argmax(per_src))
            raise RoutingCapacityExceeded(v, "source", int(per_src[v]), n * max_invocations)
        for c in uniq:
            sel = chunk == c
            self.lenzen_route(RoutingBatch(rsrc[sel], rdst[sel]))
        return ordered


def _rank_within(keys: np.ndarray) -> np.ndarray:
    """Rank of each element among equal keys, in array order."""
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    starts = np.r_[0, np.flatnonzero(sk[1:] != sk[:-1]) + 1]
    run_id = np.zeros(sk.size, dtype=np.int64)
    run_id[starts[1:]] = 1
    run_id = np.cumsum(run_id)
    ranks_sorted = np.arange(sk.size) - starts[run_id]
    out = np.empty_like(ranks_sorted)
    out[order] = ranks_sorted
    return out


class BroadcastView(Mapping):
    """Receiver -> {sender: word}; every receiver hears every other sender."""

    def __init__(self, n: int, words: dict[int, object]):
        self._n = n
        self._words = words

    def __getitem__(self, receiver: int) -> dict[int, object]:
        if not 0 <= receiver < self._n:
            raise KeyError(receiver)
        return {s: w for s, w in self._words.items() if s != receiver}

    def __iter__(self):
        return iter(range(self._n))

    def __len__(self) -> int:
        return self._n
