"""Exception types raised by the simulator and the algorithms."""


class CliqueError(Exception):
    """Base class for every error raised by this package."""


class BandwidthViolation(CliqueError):
    """A direct round put more than one payload, or an oversized payload, on a link."""


class RoutingCapacityExceeded(CliqueError):
    """A routing batch exceeds the n-messages-per-node budget."""

    def __init__(self, node: int, direction: str, count: int, capacity: int):
        self.node = node
        self.direction = direction
        self.count = count
        self.capacity = capacity
        super().__init__(
            f"node {node} {direction} overflow: {count} envelopes > capacity {capacity}"
        )


class UndefinedAspectRatio(CliqueError):
    """Aspect ratio requested for fewer than two points."""


class NotMetricError(CliqueError):
    """A metric-only algorithm was handed an instance without distances."""


class DegreeTooHigh(CliqueError):
    """Max degree exceeds what the simulated local MIS may route in O(1) rounds."""


class ColoringOverflow(CliqueError):
    """Greedy colouring needed more colours than the palette allows."""


class BudgetInfeasible(CliqueError):
    """A parallel schedule would overload some node's per-call budget."""


class ConfigError(CliqueError, ValueError):
    """Invalid configuration value."""


class TooLarge(CliqueError, ValueError):
    """Input is above an oracle's exhaustive-search cap."""
