"""Compute nodes and the seven instance-placement algorithms.

Scores are computed in exact rational arithmetic so that tie-breaking by
lowest node id is reproducible: two nodes whose objectives are equal as
fractions are a true tie, never a float-rounding accident.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Collection, Iterable, Optional, Union

from .errors import UnderflowViolation
from .kernel import SimTime

Numeric = Union[int, float, str, Fraction]


def as_fraction(value: Numeric) -> Fraction:
    """Exact conversion; floats go through str() so 0.5 means one half,
    not its binary approximation's long tail."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class ResourceDemand:
    """Fixed per-instance consumption, constant from provisioning to teardown."""

    cpu: Fraction
    mem_mb: int

    @classmethod
    def of(cls, cpu: Numeric, mem_mb: int) -> "ResourceDemand":
        demand = cls(as_fraction(cpu), int(mem_mb))
        if demand.cpu <= 0 or demand.mem_mb <= 0:
            raise ValueError("resource demand must be strictly positive")
        return demand


class NodeState(str, Enum):
    PROVISIONING = "provisioning"
    ACTIVE = "active"
    FAILED = "failed"
    DEPROVISIONED = "deprovisioned"


LIVE_NODE_STATES = frozenset({NodeState.PROVISIONING, NodeState.ACTIVE})


@dataclass
class ComputeNode:
    """A capacity pool (CPU, memory) hosting function instances."""

    id: int
    cpu_capacity: Fraction
    mem_capacity_mb: int
    cpu_used: Fraction = Fraction(0)
    mem_used_mb: int = 0
    state: NodeState = NodeState.PROVISIONING
    hosted_instances: list[int] = field(default_factory=list)
    provisioned_at: SimTime = 0
    activated_at: Optional[SimTime] = None
    last_active_at: SimTime = 0
    ended_at: Optional[SimTime] = None

    @property
    def label(self) -> str:
        return f"N{self.id}"

    @property
    def cpu_free(self) -> Fraction:
        return self.cpu_capacity - self.cpu_used

    @property
    def mem_free_mb(self) -> int:
        return self.mem_capacity_mb - self.mem_used_mb

    @property
    def is_live(self) -> bool:
        return self.state in LIVE_NODE_STATES

    def fits(self, demand: ResourceDemand) -> bool:
        return self.cpu_free >= demand.cpu and self.mem_free_mb >= demand.mem_mb

    def allocate(self, demand: ResourceDemand, instance_id: int) -> None:
        self.cpu_used += demand.cpu
        self.mem_used_mb += demand.mem_mb
        self.hosted_instances.append(instance_id)

    def release(self, demand: ResourceDemand, instance_id: int) -> None:
        if self.cpu_used - demand.cpu < 0 or self.mem_used_mb - demand.mem_mb < 0:
            raise UnderflowViolation(
                f"release of ({demand.cpu}, {demand.mem_mb}) underflows {self.label}"
            )
        self.cpu_used -= demand.cpu
        self.mem_used_mb -= demand.mem_mb
        if instance_id in self.hosted_instances:
            self.hosted_instances.remove(instance_id)


# -- scoring helpers --------------------------------------------------------


def remaining_score(node: ComputeNode, demand: ResourceDemand) -> Fraction:
    """Normalised remaining capacity after a hypothetical placement."""
    return (node.cpu_free - demand.cpu) / node.cpu_capacity + Fraction(
        node.mem_free_mb - demand.mem_mb, node.mem_capacity_mb
    )


def current_utilisation(node: ComputeNode) -> Fraction:
    """Average of the CPU and memory utilisation fractions."""
    return (
        node.cpu_used / node.cpu_capacity
        + Fraction(node.mem_used_mb, node.mem_capacity_mb)
    ) / 2


def post_placement_utilisation(node: ComputeNode, demand: ResourceDemand) -> Fraction:
    return (
        (node.cpu_used + demand.cpu) / node.cpu_capacity
        + Fraction(node.mem_used_mb + demand.mem_mb, node.mem_capacity_mb)
    ) / 2


def select_node(
    nodes: Iterable[ComputeNode],
    demand: ResourceDemand,
    function_type: str,
    strategy: str,
    type_host_node_ids: Collection[int] = (),
) -> Optional[int]:
    """Choose the node for a new instance, or None if nothing feasible.

    `type_host_node_ids` is the set of node ids already hosting a live
    instance of `function_type` (used by affinity / anti-affinity).
    All ties break toward the lowest node id.
    """
    feasible = sorted(
        (n for n in nodes if n.state == NodeState.ACTIVE and n.fits(demand)),
        key=lambda n: n.id,
    )
    if not feasible:
        return None

    if strategy == "first_fit":
        return feasible[0].id
    if strategy == "best_fit":
        return min(feasible, key=lambda n: (remaining_score(n, demand), n.id)).id
    if strategy == "worst_fit":
        return min(feasible, key=lambda n: (-remaining_score(n, demand), n.id)).id
    if strategy == "load_balanced":
        return min(feasible, key=lambda n: (current_utilisation(n), n.id)).id
    if strategy == "affinity":
        preferred = [n for n in feasible if n.id in type_host_node_ids]
        return (preferred or feasible)[0].id
    if strategy == "anti_affinity":
        preferred = [n for n in feasible if n.id not in type_host_node_ids]
        return (preferred or feasible)[0].id
    if strategy == "cost_optimised":
        return min(
            feasible, key=lambda n: (-post_placement_utilisation(n, demand), n.id)
        ).id
    raise ValueError(f"unknown placement strategy {strategy!r}")
