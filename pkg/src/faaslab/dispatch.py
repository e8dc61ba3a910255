"""The request dispatcher: FIFO queue plus the three routing strategies.

Routing is a pure decision over the live instances of one function type
(sorted by id); the dispatcher owns the only mutable strategy state, the
round-robin cursor. Scale-up itself is performed by the engine — routing
merely reports whether it should happen.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .config import SimConfig
from .errors import DuplicateEnqueue
from .kernel import SimTime
from .lifecycle import FunctionInstance, InstanceState
from .workload import Request


class RoutingOutcome(str, Enum):
    ASSIGN = "assign"
    ENQUEUE = "enqueue"
    ENQUEUE_AND_SCALE_UP = "enqueue_and_scale_up"


@dataclass(frozen=True)
class RoutingDecision:
    outcome: RoutingOutcome
    instance_id: Optional[int] = None


@dataclass
class QueueEntry:
    request_id: int
    enqueue_time: SimTime
    ttl_deadline: SimTime
    ttl_event_id: int


def scale_up_wanted(
    instances: Sequence[FunctionInstance],
    config: SimConfig,
    pending_scale_ups: int = 0,
) -> bool:
    """Should an enqueued request also trigger provisioning?

    Always when nothing for the type exists or is already on its way; when
    capacity exists but is busy/cold-starting, only if `scale_up_on_busy` is
    set. Bounded by the per-type instance limit either way.
    """
    effective = len(instances) + pending_scale_ups
    if effective >= config.max_instances:
        return False
    return config.scale_up_on_busy or effective == 0


class Dispatcher:
    """FIFO queue with TTL bookkeeping and per-type round-robin cursors."""

    def __init__(self) -> None:
        self.queue: deque[QueueEntry] = deque()
        self._queued_ids: set[int] = set()
        self._rr_cursor: dict[str, int] = {}

    # -- routing ---------------------------------------------------------

    def route(
        self,
        request: Request,
        instances: Sequence[FunctionInstance],
        config: SimConfig,
        pending_scale_ups: int = 0,
    ) -> RoutingDecision:
        """Pick an instance for `request`, or report the enqueue outcome.

        `instances` must be the live instances of the request's function
        type in ascending id order.
        """
        strategy = config.routing_strategy
        if strategy == "warm_priority":
            chosen = self._route_warm_priority(instances)
        elif strategy == "round_robin":
            chosen = self._route_round_robin(request.function_type, instances)
        elif strategy == "least_connections":
            chosen = self._route_least_connections(instances)
        else:
            raise ValueError(f"unknown routing strategy {strategy!r}")

        if chosen is not None:
            return RoutingDecision(RoutingOutcome.ASSIGN, chosen.id)
        if scale_up_wanted(instances, config, pending_scale_ups):
            return RoutingDecision(RoutingOutcome.ENQUEUE_AND_SCALE_UP)
        return RoutingDecision(RoutingOutcome.ENQUEUE)

    @staticmethod
    def _route_warm_priority(
        instances: Sequence[FunctionInstance],
    ) -> Optional[FunctionInstance]:
        # Reuse the lowest-id warm instance; busy instances are never
        # targeted even when they have spare slots.
        for inst in instances:
            if inst.state == InstanceState.WARM and inst.free_slots > 0:
                return inst
        return None

    def _route_round_robin(
        self, function_type: str, instances: Sequence[FunctionInstance]
    ) -> Optional[FunctionInstance]:
        # Rotate over warm/busy instances (cold-starting ones are not yet
        # available for processing), skipping any without a free slot.
        candidates = [i for i in instances if i.state != InstanceState.COLD_STARTING]
        if not candidates:
            return None
        cursor = self._rr_cursor.get(function_type, 0)
        if cursor >= len(candidates):
            cursor = 0
        for offset in range(len(candidates)):
            idx = (cursor + offset) % len(candidates)
            if candidates[idx].free_slots > 0:
                self._rr_cursor[function_type] = (idx + 1) % len(candidates)
                return candidates[idx]
        return None

    @staticmethod
    def _route_least_connections(
        instances: Sequence[FunctionInstance],
    ) -> Optional[FunctionInstance]:
        available = [
            i
            for i in instances
            if i.state != InstanceState.COLD_STARTING and i.free_slots > 0
        ]
        if not available:
            return None
        return min(available, key=lambda i: (len(i.in_flight), i.id))

    # -- queue -----------------------------------------------------------

    def enqueue(
        self,
        request: Request,
        now: SimTime,
        ttl_deadline: SimTime,
        ttl_event_id: int,
    ) -> int:
        """Append at the tail; returns the 0-based queue position."""
        if request.id in self._queued_ids or request.is_terminal:
            raise DuplicateEnqueue(f"request {request.id} cannot be enqueued")
        self.queue.append(
            QueueEntry(request.id, now, ttl_deadline, ttl_event_id)
        )
        self._queued_ids.add(request.id)
        return len(self.queue) - 1

    def head(self) -> Optional[QueueEntry]:
        return self.queue[0] if self.queue else None

    def pop_head(self) -> QueueEntry:
        entry = self.queue.popleft()
        self._queued_ids.discard(entry.request_id)
        return entry

    def remove(self, request_id: int) -> Optional[QueueEntry]:
        """Drop a specific request (TTL expiry); None if not queued."""
        if request_id not in self._queued_ids:
            return None
        for i, entry in enumerate(self.queue):
            if entry.request_id == request_id:
                del self.queue[i]
                self._queued_ids.discard(request_id)
                return entry
        return None

    def is_queued(self, request_id: int) -> bool:
        return request_id in self._queued_ids

    def __len__(self) -> int:
        return len(self.queue)
