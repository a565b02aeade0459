"""Simulation constants in one place."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ConfigError

# exhaustive-oracle caps
MFL_ORACLE_MAX_N = 14
METRIC_CHECK_MAX_N = 256
CUT_CHECK_MAX_N = 2048


@dataclass(frozen=True)
class SimConfig:
    """Knobs of the simulated network and the algorithms running on it.

    ``lenzen_rounds`` and ``swmis_rounds`` are the constants hidden inside
    the O(1) round bounds of the routing primitive and of the local-MIS
    black box; they only rescale round reports.
    """

    bandwidth_words: int = 1
    lenzen_rounds: int = 2
    swmis_rounds: int = 4
    rho: float = 2.0
    sw_degree_const: float = 8.0
    sw_strategy: str = "oracle"
    sw_radius_const: float = 1.0
    c1: float = 2.0
    c2: float = 5.0
    parallel_charge: str = "max"
    sparse_budget: int = 50

    def __post_init__(self):
        if self.bandwidth_words < 1:
            raise ConfigError("bandwidth_words must be >= 1")
        if self.lenzen_rounds < 1:
            raise ConfigError("lenzen_rounds (C_LENZEN) must be >= 1")
        if self.swmis_rounds < 1:
            raise ConfigError("swmis_rounds (C_SWMIS) must be >= 1")
        if self.rho <= 0:
            raise ConfigError("rho must be > 0")
        if self.sw_degree_const <= 0:
            raise ConfigError("sw_degree_const must be > 0")
        if self.sw_strategy not in ("oracle", "faithful"):
            raise ConfigError("sw_strategy must be 'oracle' or 'faithful'")
        if not self.c1 > 1:
            raise ConfigError("constraint violated: c1 > 1")
        if not self.c2 > self.c1 + 2:
            raise ConfigError("constraint violated: c2 > c1 + 2")
        if self.parallel_charge not in ("max", "sum"):
            raise ConfigError("parallel_charge must be 'max' or 'sum'")
        if self.sparse_budget < 1:
            raise ConfigError("sparse_budget must be >= 1")

    @property
    def gamma(self) -> int:
        """Max degree bound of the 9r-graph on a 4-ruling set: 18^rho."""
        return int(round(18.0 ** self.rho))

    def to_dict(self) -> dict:
        return asdict(self)
