"""Result records shared between the algorithms and the oracles."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import CostLedger


@dataclass
class VerificationReport:
    check: str
    passed: bool
    witness: object = None

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError(f"failing report {self.check!r} needs a witness")

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"check": self.check, "passed": self.passed, "witness": self.witness}


@dataclass
class TreeResult:
    """A spanning forest: edges ``(u, v, w)`` with ``u < v``."""

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    spanning: bool = True
    ledger: CostLedger = field(default_factory=CostLedger)

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.w))

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.w.tolist()))

    def __len__(self) -> int:
        return int(self.u.size)


@dataclass
class FacilitySolution:
    open: np.ndarray
    assign: np.ndarray
    opening_cost: float
    connection_cost: float

    @property
    def cost(self) -> float:
        return self.opening_cost + self.connection_cost

    @classmethod
    def evaluate(cls, dist: np.ndarray, costs: np.ndarray, open_mask) -> "FacilitySolution":
        """Connect every client to its nearest open facility (lowest id on ties)."""
        mask = np.asarray(open_mask, dtype=bool)
        fac = np.flatnonzero(mask)
        if fac.size == 0:
            raise ValueError("at least one facility must be open")
        sub = dist[:, fac]
        nearest = np.argmin(sub, axis=1)
        assign = fac[nearest]
        conn = float(np.sum(sub[np.arange(dist.shape[0]), nearest]))
        return cls(fac, assign, float(np.sum(costs[fac])), conn)

    def to_dict(self) -> dict:
        return {
            "open": self.open.tolist(),
            "cost": self.cost,
            "opening_cost": self.opening_cost,
            "connection_cost": self.connection_cost,
        }
