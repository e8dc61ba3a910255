"""Deterministic discrete-event kernel.

Virtual clock in integer milliseconds, a future-event set ordered by
(time, id), seeded random streams, and an append-only event log. Every
other module schedules and observes through this one.
"""

from __future__ import annotations

import heapq
import json
import random
import zlib
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Optional, Union

from .errors import SchedulingInPast

SimTime = int  # milliseconds since simulation start

Subject = Union[int, str, None]


class EventKind(str, Enum):
    REQUEST_ARRIVAL = "request_arrival"
    COLD_START_COMPLETE = "cold_start_complete"
    EXECUTION_COMPLETE = "execution_complete"
    TTL_EXPIRY = "ttl_expiry"
    EXECUTION_TIMEOUT = "execution_timeout"
    INACTIVITY_CHECK = "inactivity_check"
    NODE_PROVISIONED = "node_provisioned"
    NODE_FAILED = "node_failed"
    COMMAND_APPLIED = "command_applied"


@dataclass
class SimEvent:
    """One timestamped record in the simulation's total order.

    Handlers may annotate ``subject``/``payload`` while processing; the log
    holds the annotated record.
    """

    id: int
    time: SimTime
    kind: EventKind
    subject: Subject = None
    payload: Optional[dict] = None

    def to_record(self) -> dict:
        rec = {"id": self.id, "time": self.time, "kind": self.kind.value}
        if self.subject is not None:
            rec["subject"] = self.subject
        if self.payload:
            rec["payload"] = self.payload
        return rec


def derive_seed(seed: int, stream: str) -> int:
    """Stable per-stream seed derivation (same result on every platform)."""
    return (seed ^ zlib.crc32(stream.encode("utf-8"))) & 0xFFFFFFFFFFFFFFFF


def make_rng(seed: int) -> random.Random:
    """Seeded generator; identical draw sequence across runs and platforms."""
    return random.Random(seed)


class Kernel:
    """Single-threaded event loop: schedule, cancel, step, run_until.

    Ties at the same time are broken by insertion id, and cancellation is
    tombstone-based so ids stay dense and ordering never changes.
    """

    def __init__(self) -> None:
        self.clock: SimTime = 0
        self.log: list[SimEvent] = []
        self.handler: Optional[Callable[[SimEvent], None]] = None
        self._heap: list[tuple[SimTime, int, SimEvent]] = []
        self._next_id = 1
        self._cancelled: set[int] = set()
        self._scheduled_count = 0

    # -- scheduling ------------------------------------------------------

    def schedule(
        self,
        time: SimTime,
        kind: EventKind,
        subject: Subject = None,
        payload: Optional[dict] = None,
    ) -> int:
        if time < self.clock:
            raise SchedulingInPast(
                f"cannot schedule {kind.value} at t={time} (clock={self.clock})"
            )
        event = SimEvent(self._next_id, time, kind, subject, payload)
        self._next_id += 1
        self._scheduled_count += 1
        heapq.heappush(self._heap, (time, event.id, event))
        return event.id

    def cancel(self, event_id: Optional[int]) -> None:
        """Tombstone a pending event; cancelling a fired/None id is a no-op."""
        if event_id is not None:
            self._cancelled.add(event_id)

    def append_log_record(
        self, kind: EventKind, subject: Subject = None, payload: Optional[dict] = None
    ) -> SimEvent:
        """Append a non-scheduled record (e.g. an applied command) to the log.

        Uses the same id counter as scheduled events so log ids stay strictly
        increasing in insertion order.
        """
        event = SimEvent(self._next_id, self.clock, kind, subject, payload)
        self._next_id += 1
        self.log.append(event)
        return event

    # -- processing ------------------------------------------------------

    def peek_time(self) -> Optional[SimTime]:
        """Time of the next live event, or None if the future set is empty."""
        while self._heap:
            time, event_id, _ = self._heap[0]
            if event_id in self._cancelled:
                heapq.heappop(self._heap)
                self._cancelled.discard(event_id)
                continue
            return time
        return None

    def step(self) -> Optional[SimEvent]:
        """Process the minimal (time, id) event; None when nothing is pending."""
        if self.peek_time() is None:
            return None
        _, _, event = heapq.heappop(self._heap)
        self.clock = event.time
        self.log.append(event)
        if self.handler is not None:
            self.handler(event)
        return event

    def run_until(self, t: SimTime) -> int:
        """Process every event with time <= t; clock ends at max(t, last event)."""
        if t < self.clock:
            raise SchedulingInPast(f"run_until({t}) is behind clock {self.clock}")
        count = 0
        while True:
            next_time = self.peek_time()
            if next_time is None or next_time > t:
                break
            self.step()
            count += 1
        if self.clock < t:
            self.clock = t
        return count

    # -- introspection ----------------------------------------------------

    def __iter__(self) -> Iterator[SimEvent]:
        return iter(self.log)

    def pending_count(self) -> int:
        return sum(1 for _, eid, _ in self._heap if eid not in self._cancelled)


def serialize_log(events: list[SimEvent]) -> str:
    """Newline-delimited JSON records, one per processed event."""
    lines = [json.dumps(e.to_record(), sort_keys=True) for e in events]
    return "\n".join(lines) + ("\n" if lines else "")
