"""Core functionality for ctssim."""

from ctssim.core.config import ConfigurationError, SimConfig
from ctssim.core.harness import Simulation, SimulationResult, TraceRecord, run
from ctssim.core.map_model import (
    EmptyGraphError,
    MapDocument,
    MapEdge,
    MapGraph,
    MapNode,
    MapSemanticError,
    MapSyntaxError,
    NodeKind,
    ObstacleSpec,
    StopPointSpec,
    load_map,
    nearest_node,
    parse_map,
    serialize_map,
)
from ctssim.core.metrics import EmptyTraceError, MetricsReport, StopMetrics, compute_metrics
from ctssim.core.scenario import Scenario, build_scenario

__all__ = [
    "ConfigurationError",
    "EmptyGraphError",
    "EmptyTraceError",
    "MapDocument",
    "MapEdge",
    "MapGraph",
    "MapNode",
    "MapSemanticError",
    "MapSyntaxError",
    "MetricsReport",
    "NodeKind",
    "ObstacleSpec",
    "Scenario",
    "SimConfig",
    "Simulation",
    "SimulationResult",
    "StopMetrics",
    "StopPointSpec",
    "TraceRecord",
    "build_scenario",
    "compute_metrics",
    "load_map",
    "nearest_node",
    "parse_map",
    "run",
    "serialize_map",
]
