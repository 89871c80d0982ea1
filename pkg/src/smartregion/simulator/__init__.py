"""Discrete-event simulation of region-routed networks."""

from .engine import (
    EventKind,
    EventPacket,
    ExplorerPacket,
    NodeNotInRegion,
    Packet,
    SimConfigError,
    SimEvent,
    Simulation,
    run,
)
from .metrics import DROP_REASONS, Metrics
from .scenario import (
    ExplorerSpec,
    EventSpec,
    FlowSpec,
    MigrationSpec,
    ScenarioConfig,
    ScenarioError,
    load_scenario,
    parse_scenario,
)
