"""Congested-clique simulation of ruling-set, MIS, MST and facility-location algorithms."""
from .config import SimConfig
from .engine import Clique, CoinSource, CostLedger, Envelope, RoutingBatch
from .errors import (
    BandwidthViolation,
    BudgetInfeasible,
    ColoringOverflow,
    ConfigError,
    DegreeTooHigh,
    NotMetricError,
    RoutingCapacityExceeded,
    TooLarge,
    UndefinedAspectRatio,
)
from .metric import (
    Graph,
    Instance,
    InstanceSpec,
    MetricSpace,
    aspect_ratio,
    bfs_distance,
    generate,
    growth_bound_check,
    threshold_graph,
)

__version__ = "0.1.0"
