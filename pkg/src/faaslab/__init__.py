"""faaslab: a deterministic discrete-event simulator of a serverless platform.

Request lifecycle (gateway, FIFO dispatcher, routing), bin-packing
placement, cold starts, autoscaling, failure injection, a cost model and
side-by-side strategy battlegrounds — all reproducible from a seed.
"""

from .battleground import Battleground
from .config import ScriptedBurst, ScriptedFailure, SimConfig, WorkloadSpec
from .dispatch import Dispatcher, RoutingDecision, RoutingOutcome
from .engine import Simulation, replay_with_commands
from .kernel import EventKind, Kernel, SimEvent, SimTime, serialize_log
from .lifecycle import FunctionInstance, InstanceState
from .metrics import MetricsCollector, cost, export_csv
from .placement import ComputeNode, NodeState, ResourceDemand, select_node
from .workload import (
    Request,
    RequestStatus,
    load_scenario,
    load_scenario_or_file,
    next_arrival,
)

__version__ = "0.1.0"

__all__ = [
    "Battleground",
    "ComputeNode",
    "Dispatcher",
    "EventKind",
    "FunctionInstance",
    "InstanceState",
    "Kernel",
    "MetricsCollector",
    "NodeState",
    "Request",
    "RequestStatus",
    "ResourceDemand",
    "RoutingDecision",
    "RoutingOutcome",
    "ScriptedBurst",
    "ScriptedFailure",
    "SimConfig",
    "SimEvent",
    "SimTime",
    "Simulation",
    "WorkloadSpec",
    "cost",
    "export_csv",
    "load_scenario",
    "load_scenario_or_file",
    "next_arrival",
    "replay_with_commands",
    "select_node",
    "serialize_log",
]
