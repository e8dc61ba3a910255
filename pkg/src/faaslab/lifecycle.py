"""Function-instance state machine.

ColdStarting (orange in the UI), Busy (blue) and Warm (green) are the
live states; Terminated and Failed are absorbing. All mutations happen
inside engine event handlers, so the types here stay thread-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .kernel import SimTime
from .placement import ResourceDemand


class InstanceState(str, Enum):
    COLD_STARTING = "cold_starting"
    BUSY = "busy"
    WARM = "warm"
    TERMINATED = "terminated"
    FAILED = "failed"


LIVE_INSTANCE_STATES = frozenset(
    {InstanceState.COLD_STARTING, InstanceState.BUSY, InstanceState.WARM}
)

# legal transitions; anything else is a bug
ALLOWED_TRANSITIONS = {
    InstanceState.COLD_STARTING: {InstanceState.WARM, InstanceState.FAILED},
    InstanceState.WARM: {
        InstanceState.BUSY,
        InstanceState.TERMINATED,
        InstanceState.FAILED,
    },
    InstanceState.BUSY: {InstanceState.WARM, InstanceState.FAILED},
    InstanceState.TERMINATED: set(),
    InstanceState.FAILED: set(),
}


@dataclass
class FunctionInstance:
    """An isolated execution environment with bounded concurrency slots."""

    id: int
    function_type: str
    node_id: int
    concurrency_limit: int
    demand: ResourceDemand
    created_at: SimTime
    cold_ready_at: SimTime
    state: InstanceState = InstanceState.COLD_STARTING
    in_flight: list[int] = field(default_factory=list)
    last_idle_since: Optional[SimTime] = None
    ended_at: Optional[SimTime] = None
    served_count: int = 0
    cold_event_id: Optional[int] = None  # pending cold-start completion

    @property
    def label(self) -> str:
        return f"I{self.id}"

    @property
    def free_slots(self) -> int:
        return self.concurrency_limit - len(self.in_flight)

    @property
    def is_live(self) -> bool:
        return self.state in LIVE_INSTANCE_STATES

    def can_transition(self, target: InstanceState) -> bool:
        return target in ALLOWED_TRANSITIONS[self.state]
