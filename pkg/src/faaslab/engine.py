"""One simulation arena: the event handlers that tie every module together.

A Simulation owns a kernel, the request/instance/node registries, the
dispatcher, a metrics collector and two seeded RNG streams (workload and
service jitter). Everything it does happens inside kernel event handlers
or between events via apply_command, so a fixed (config, seed, command
sequence) always reproduces the identical event log.
"""

from __future__ import annotations

import hashlib
import json
from typing import Callable, Optional

from . import faults
from .config import SimConfig
from .dispatch import Dispatcher, RoutingOutcome, scale_up_wanted
from .errors import (
    ConcurrencyExceeded,
    InstanceLimitReached,
    NoCapacity,
    NodeLimitReached,
    NodeNotActive,
    UnknownCommand,
    UnknownFunctionType,
    UnknownNode,
)
from .kernel import EventKind, Kernel, SimEvent, SimTime, derive_seed, make_rng
from .lifecycle import FunctionInstance, InstanceState
from .metrics import MetricsCollector, export_csv
from .placement import ComputeNode, NodeState, ResourceDemand, as_fraction, select_node
from .workload import (
    Request,
    RequestStatus,
    next_arrival,
    pick_function_type,
)


def parse_entity_id(value) -> int:
    """Accept 3, "3", "N3" or "I3" and return the numeric id."""
    if isinstance(value, int):
        return value
    text = str(value).strip()
    if text and text[0] in "NIni":
        text = text[1:]
    return int(text)


class Simulation:
    """A deterministic serverless-platform arena driven by one event loop."""

    def __init__(
        self,
        config: SimConfig,
        label: str = "A",
        workload_seed: Optional[int] = None,
    ) -> None:
        config.validate()
        self.config = config
        self.label = label
        self.kernel = Kernel()
        self.kernel.handler = self._dispatch_event
        self.workload_rng = make_rng(
            derive_seed(config.seed if workload_seed is None else workload_seed, "workload")
        )
        self.service_rng = make_rng(derive_seed(config.seed, f"service:{label}"))
        self.dispatcher = Dispatcher()
        self.metrics = MetricsCollector(config.sample_interval_ms)
        self.requests: dict[int, Request] = {}
        self.instances: dict[int, FunctionInstance] = {}
        self.nodes: dict[int, ComputeNode] = {}
        self.command_log: list[dict] = []
        self.listeners: list[Callable[[SimEvent], None]] = []
        self.processed_events = 0
        self._next_request_id = 1
        self._next_instance_id = 1
        self._next_node_id = 1
        self._pending_scaleups: list[str] = []
        self._inactivity_check_pending = False
        self._auto_arrival_event: Optional[int] = None
        self._handlers = {
            EventKind.REQUEST_ARRIVAL: self._on_request_arrival,
            EventKind.COLD_START_COMPLETE: self._on_cold_start_complete,
            EventKind.EXECUTION_COMPLETE: self._on_execution_complete,
            EventKind.TTL_EXPIRY: self._on_ttl_expiry,
            EventKind.EXECUTION_TIMEOUT: self._on_execution_timeout,
            EventKind.INACTIVITY_CHECK: self._on_inactivity_check,
            EventKind.NODE_PROVISIONED: self._on_node_provisioned,
            EventKind.NODE_FAILED: self._on_node_failed,
        }
        self._bootstrap()

    # -- setup -------------------------------------------------------------

    def _bootstrap(self) -> None:
        workload = self.config.workload
        if workload.mode == "auto_rate":
            self._schedule_next_auto_arrival(0)
        elif workload.mode == "scenario":
            for burst in workload.script:
                for _ in range(burst.count):
                    self.kernel.schedule(
                        burst.at_ms,
                        EventKind.REQUEST_ARRIVAL,
                        payload={"function_type": burst.function_type, "source": "script"},
                    )
        for failure in self.config.fail_node_at:
            self.kernel.schedule(
                failure.at_ms,
                EventKind.NODE_FAILED,
                subject=failure.node,
                payload={"via": "script"},
            )

    def _schedule_next_auto_arrival(self, now: SimTime) -> None:
        at = next_arrival(self.config.workload, now, self.workload_rng)
        self._auto_arrival_event = self.kernel.schedule(
            at, EventKind.REQUEST_ARRIVAL, payload={"source": "auto"}
        )

    # -- event plumbing ------------------------------------------------------

    def _dispatch_event(self, event: SimEvent) -> None:
        self.processed_events += 1
        self.metrics.flush_samples(event.time, self.probe)
        handler = self._handlers.get(event.kind)
        if handler is not None:
            handler(event)
        self._emit(event)

    def _emit(self, event: SimEvent) -> None:
        for listener in self.listeners:
            listener(event)

    def run_until(self, t: SimTime) -> int:
        """Process all events with time <= t and sample the series up to t."""
        count = self.kernel.run_until(t)
        self.metrics.flush_samples_inclusive(t, self.probe)
        return count

    def step(self) -> Optional[SimEvent]:
        return self.kernel.step()

    @property
    def clock(self) -> SimTime:
        return self.kernel.clock

    # -- registries ----------------------------------------------------------

    def live_instances_of(self, function_type: str) -> list[FunctionInstance]:
        return sorted(
            (
                i
                for i in self.instances.values()
                if i.function_type == function_type and i.is_live
            ),
            key=lambda i: i.id,
        )

    def live_node_count(self) -> int:
        return sum(1 for n in self.nodes.values() if n.is_live)

    def _type_host_nodes(self, function_type: str) -> set[int]:
        return {i.node_id for i in self.instances.values() if i.function_type == function_type and i.is_live}

    # -- arrivals --------------------------------------------------------------

    def _create_request(self, function_type: str, arrival: SimTime) -> Request:
        if function_type not in self.config.exec_base_ms:
            raise UnknownFunctionType(f"no execution profile for {function_type!r}")
        request = Request(self._next_request_id, function_type, arrival)
        self._next_request_id += 1
        self.requests[request.id] = request
        self.metrics.request_created()
        return request

    def inject(self, n: int, function_type: str) -> list[Request]:
        """Manually trigger n requests at the current clock.

        The requests are created immediately; their gateway traversal happens
        when the scheduled arrival events fire (same simulated time).
        """
        if n < 1:
            raise ValueError("inject needs n >= 1")
        created = []
        for _ in range(n):
            request = self._create_request(function_type, self.kernel.clock)
            self.kernel.schedule(
                self.kernel.clock,
                EventKind.REQUEST_ARRIVAL,
                subject=request.id,
                payload={"source": "inject"},
            )
            created.append(request)
        return created

    def _on_request_arrival(self, event: SimEvent) -> None:
        source = (event.payload or {}).get("source")
        if source == "auto":
            if event.id == self._auto_arrival_event:
                self._auto_arrival_event = None
            function_type = pick_function_type(self.config.workload, self.workload_rng)
            request = self._create_request(function_type, event.time)
            event.subject = request.id
            event.payload = {"source": "auto", "function_type": function_type}
            if self.config.workload.mode == "auto_rate":
                self._schedule_next_auto_arrival(event.time)
        elif source == "script":
            function_type = event.payload["function_type"]
            request = self._create_request(function_type, event.time)
            event.subject = request.id
        else:  # injected: created eagerly by inject()
            request = self.requests[event.subject]
        self._admit(request)

    # -- gateway -> dispatcher --------------------------------------------------

    def _admit(self, request: Request) -> None:
        instances = self.live_instances_of(request.function_type)
        pending = self._pending_scaleups.count(request.function_type)
        if len(self.dispatcher) > 0:
            # FIFO: nobody overtakes a non-empty queue
            self._enqueue(
                request, scale_up_wanted(instances, self.config, pending)
            )
            return
        decision = self.dispatcher.route(request, instances, self.config, pending)
        if decision.outcome == RoutingOutcome.ASSIGN:
            self._assign(self.instances[decision.instance_id], request)
        else:
            self._enqueue(
                request, decision.outcome == RoutingOutcome.ENQUEUE_AND_SCALE_UP
            )

    def _enqueue(self, request: Request, scale_up: bool) -> None:
        now = self.kernel.clock
        deadline = now + self.config.request_ttl_ms
        ttl_event = self.kernel.schedule(
            deadline, EventKind.TTL_EXPIRY, subject=request.id
        )
        self.dispatcher.enqueue(request, now, deadline, ttl_event)
        request.enqueue_time = now
        request.status = RequestStatus.IN_QUEUE
        if scale_up:
            outcome = self.try_scale_up(request.function_type)
            if outcome in ("created", "pending"):
                request.status = RequestStatus.COLD_START_WAIT

    # -- scaling ------------------------------------------------------------------

    def provision_instance(self, function_type: str) -> Optional[FunctionInstance]:
        """Provision one instance of `function_type` now.

        Returns the new ColdStarting instance, or None when a node had to be
        provisioned first (the instance follows when the node activates).
        Raises InstanceLimitReached / NoCapacity when limits forbid growth.
        """
        outcome = self.try_scale_up(function_type)
        if outcome == "instance_limit":
            raise InstanceLimitReached(
                f"{function_type!r} already has {self.config.max_instances} instances"
            )
        if outcome == "no_capacity":
            raise NoCapacity(
                "no feasible node and the node limit prevents provisioning one"
            )
        if outcome == "created":
            newest = max(
                i.id
                for i in self.instances.values()
                if i.function_type == function_type and i.is_live
            )
            return self.instances[newest]
        return None  # pending: a node is on its way up

    def provision_node(self) -> ComputeNode:
        """Bring up one more node; NodeProvisioned fires after the startup
        delay. Raises NodeLimitReached at the configured ceiling."""
        if self.live_node_count() >= self.config.max_nodes:
            raise NodeLimitReached(f"already at max_nodes={self.config.max_nodes}")
        return self._provision_node()

    def try_scale_up(self, function_type: str) -> str:
        """Provision an instance of `function_type` if limits and capacity allow.

        Returns one of "created", "pending" (waiting on a provisioning node),
        "instance_limit" or "no_capacity".
        """
        live = self.live_instances_of(function_type)
        pending = self._pending_scaleups.count(function_type)
        if len(live) + pending >= self.config.max_instances:
            return "instance_limit"
        demand = ResourceDemand.of(self.config.instance_cpu, self.config.instance_mem_mb)
        node_id = select_node(
            self.nodes.values(),
            demand,
            function_type,
            self.config.placement_strategy,
            self._type_host_nodes(function_type),
        )
        if node_id is not None:
            self._create_instance(function_type, self.nodes[node_id], demand)
            return "created"
        if any(n.state == NodeState.PROVISIONING for n in self.nodes.values()):
            self._pending_scaleups.append(function_type)
            return "pending"
        if self.live_node_count() < self.config.max_nodes:
            self._provision_node()
            self._pending_scaleups.append(function_type)
            return "pending"
        return "no_capacity"

    def rescale_for_queue(self) -> None:
        """Re-issue scale-ups for queued demand after capacity was destroyed."""
        for entry in list(self.dispatcher.queue):
            request = self.requests[entry.request_id]
            instances = self.live_instances_of(request.function_type)
            pending = self._pending_scaleups.count(request.function_type)
            if scale_up_wanted(instances, self.config, pending):
                self.try_scale_up(request.function_type)

    def _provision_node(self) -> ComputeNode:
        now = self.kernel.clock
        node = ComputeNode(
            id=self._next_node_id,
            cpu_capacity=as_fraction(self.config.node_cpu),
            mem_capacity_mb=self.config.node_mem_mb,
            provisioned_at=now,
            last_active_at=now,
        )
        self._next_node_id += 1
        self.nodes[node.id] = node
        self.kernel.schedule(
            now + self.config.node_startup_delay_ms,
            EventKind.NODE_PROVISIONED,
            subject=node.label,
        )
        return node

    def _create_instance(
        self, function_type: str, node: ComputeNode, demand: ResourceDemand
    ) -> FunctionInstance:
        now = self.kernel.clock
        instance = FunctionInstance(
            id=self._next_instance_id,
            function_type=function_type,
            node_id=node.id,
            concurrency_limit=self.config.concurrency_limit,
            demand=demand,
            created_at=now,
            cold_ready_at=now + self.config.cold_start_delay_ms,
        )
        self._next_instance_id += 1
        self.instances[instance.id] = instance
        node.allocate(demand, instance.id)
        node.last_active_at = now
        instance.cold_event_id = self.kernel.schedule(
            instance.cold_ready_at, EventKind.COLD_START_COMPLETE, subject=instance.label
        )
        self.ensure_inactivity_check()
        return instance

    def _on_node_provisioned(self, event: SimEvent) -> None:
        node = self.nodes[parse_entity_id(event.subject)]
        if node.state != NodeState.PROVISIONING:
            return
        node.state = NodeState.ACTIVE
        node.activated_at = event.time
        node.last_active_at = event.time
        pending, self._pending_scaleups = self._pending_scaleups, []
        created = []
        for function_type in pending:
            outcome = self.try_scale_up(function_type)
            if outcome == "created":
                created.append(function_type)
        event.payload = {"pending_satisfied": len(created)} if pending else None
        self.drain()
        self.ensure_inactivity_check()

    # -- instance lifecycle ------------------------------------------------------

    def _on_cold_start_complete(self, event: SimEvent) -> None:
        instance = self.instances[parse_entity_id(event.subject)]
        if instance.state != InstanceState.COLD_STARTING:
            return
        instance.state = InstanceState.WARM
        instance.last_idle_since = event.time
        instance.cold_event_id = None
        self.ensure_inactivity_check()
        self.drain()

    def _assign(self, instance: FunctionInstance, request: Request) -> None:
        if instance.free_slots <= 0 or instance.state not in (
            InstanceState.WARM,
            InstanceState.BUSY,
        ):
            raise ConcurrencyExceeded(
                f"{instance.label} cannot accept request {request.id}"
            )
        now = self.kernel.clock
        instance.in_flight.append(request.id)
        instance.state = InstanceState.BUSY
        instance.last_idle_since = None
        instance.served_count += 1
        request.assigned_instance = instance.id
        request.dispatch_time = now
        request.status = RequestStatus.DISPATCHED
        request.exec_start_time = now
        request.status = RequestStatus.EXECUTING
        duration = self._exec_duration(request.function_type)
        request.completion_event_id = self.kernel.schedule(
            now + duration,
            EventKind.EXECUTION_COMPLETE,
            subject=request.id,
            payload={"instance": instance.label},
        )
        request.timeout_event_id = self.kernel.schedule(
            now + self.config.max_execution_timeout_ms,
            EventKind.EXECUTION_TIMEOUT,
            subject=request.id,
            payload={"instance": instance.label},
        )
        self.metrics.request_dispatched(request.queue_wait_ms or 0)

    def _exec_duration(self, function_type: str) -> int:
        base = self.config.exec_base_ms[function_type]
        jitter = self.config.exec_jitter
        if jitter > 0:
            drawn = self.service_rng.uniform(base * (1 - jitter), base * (1 + jitter))
            return max(0, int(drawn + 0.5))
        return base

    def drain(self) -> list[tuple[int, int]]:
        """Assign head-of-queue requests while the strategy finds capacity."""
        assignments: list[tuple[int, int]] = []
        while True:
            entry = self.dispatcher.head()
            if entry is None:
                break
            request = self.requests[entry.request_id]
            instances = self.live_instances_of(request.function_type)
            decision = self.dispatcher.route(request, instances, self.config)
            if decision.outcome != RoutingOutcome.ASSIGN:
                break
            self.dispatcher.pop_head()
            self.kernel.cancel(entry.ttl_event_id)
            self._assign(self.instances[decision.instance_id], request)
            assignments.append((request.id, decision.instance_id))
        return assignments

    def _on_execution_complete(self, event: SimEvent) -> None:
        request = self.requests[event.subject]
        if (
            request.status != RequestStatus.EXECUTING
            or request.completion_event_id != event.id
        ):
            return
        now = event.time
        instance = self.instances[request.assigned_instance]
        request.status = RequestStatus.SUCCEEDED
        request.end_time = now
        request.completion_event_id = None
        self.kernel.cancel(request.timeout_event_id)
        request.timeout_event_id = None
        instance.in_flight.remove(request.id)
        if not instance.in_flight:
            instance.state = InstanceState.WARM
            instance.last_idle_since = now
        self.metrics.request_succeeded(request, instance.demand.mem_mb)
        self.ensure_inactivity_check()
        self.drain()

    # -- faults ----------------------------------------------------------------------

    def _on_ttl_expiry(self, event: SimEvent) -> None:
        faults.expire_ttl(self, event)

    def _on_execution_timeout(self, event: SimEvent) -> None:
        request = self.requests[event.subject]
        if (
            request.status != RequestStatus.EXECUTING
            or request.timeout_event_id != event.id
        ):
            return
        instance = self.instances[request.assigned_instance]
        faults.execution_timeout(self, instance, event)

    def _on_node_failed(self, event: SimEvent) -> None:
        try:
            faults.fail_node(self, parse_entity_id(event.subject), event)
        except (UnknownNode, NodeNotActive) as exc:
            # scripted failures must not crash a headless run
            event.payload = {"error": type(exc).__name__, "detail": str(exc)}

    def fail_node(self, node: int | str) -> SimEvent:
        """Interactive node failure: applied now, recorded as a log entry."""
        node_id = parse_entity_id(node)
        target = self.nodes.get(node_id)
        if target is None:
            raise UnknownNode(f"no node N{node_id}")
        if target.state != NodeState.ACTIVE:
            raise NodeNotActive(f"N{node_id} is {target.state.value}, not active")
        record = self.kernel.append_log_record(
            EventKind.NODE_FAILED, subject=target.label, payload={"via": "command"}
        )
        faults.fail_node(self, node_id, record)
        self._emit(record)
        return record

    # -- scale-down -----------------------------------------------------------------

    @property
    def _inactivity_cadence(self) -> int:
        return max(100, self.config.inactivity_timeout_ms // 4)

    def ensure_inactivity_check(self) -> None:
        if self._inactivity_check_pending:
            return
        has_live = any(i.is_live for i in self.instances.values()) or any(
            n.is_live for n in self.nodes.values()
        )
        if not has_live:
            return
        cadence = self._inactivity_cadence
        at = (self.kernel.clock // cadence + 1) * cadence
        self.kernel.schedule(at, EventKind.INACTIVITY_CHECK)
        self._inactivity_check_pending = True

    def _on_inactivity_check(self, event: SimEvent) -> None:
        self._inactivity_check_pending = False
        now = event.time
        timeout = self.config.inactivity_timeout_ms
        reaped: list[str] = []
        idle = [
            i
            for i in self.instances.values()
            if i.state == InstanceState.WARM
            and i.last_idle_since is not None
            and now - i.last_idle_since >= timeout
        ]
        for instance in sorted(idle, key=lambda i: (i.last_idle_since, i.id)):
            instance.state = InstanceState.TERMINATED
            instance.ended_at = now
            node = self.nodes[instance.node_id]
            node.release(instance.demand, instance.id)
            if not node.hosted_instances:
                node.last_active_at = now
            reaped.append(instance.label)
        deprovisioned: list[str] = []
        for node in self.nodes.values():
            if (
                node.state == NodeState.ACTIVE
                and not node.hosted_instances
                and now - node.last_active_at >= timeout
            ):
                node.state = NodeState.DEPROVISIONED
                node.ended_at = now
                deprovisioned.append(node.label)
        if reaped or deprovisioned:
            event.payload = {"reaped": reaped, "deprovisioned": deprovisioned}
        self.ensure_inactivity_check()

    # -- metrics / introspection -------------------------------------------------------

    def probe(self) -> dict:
        """Current gauge values for the sampled series."""
        live = [i for i in self.instances.values() if i.is_live]
        active_nodes = [n for n in self.nodes.values() if n.state == NodeState.ACTIVE]
        if active_nodes:
            cpu = sum(float(n.cpu_used / n.cpu_capacity) for n in active_nodes) / len(
                active_nodes
            )
            mem = sum(n.mem_used_mb / n.mem_capacity_mb for n in active_nodes) / len(
                active_nodes
            )
        else:
            cpu = mem = 0.0
        return {
            "queue_length": len(self.dispatcher),
            "executing": sum(len(i.in_flight) for i in live),
            "live_instances": len(live),
            "cold_starting": sum(
                1 for i in live if i.state == InstanceState.COLD_STARTING
            ),
            "active_nodes": len(active_nodes),
            "cpu_utilisation": cpu,
            "mem_utilisation": mem,
        }

    def snapshot(self) -> dict:
        """Live state tables for the UI and GET /state."""
        queue_rows = [
            {
                "request_id": e.request_id,
                "enqueued_ms": e.enqueue_time,
                "ttl_deadline_ms": e.ttl_deadline,
            }
            for e in self.dispatcher.queue
        ]
        instance_rows = [
            {
                "id": i.label,
                "function_type": i.function_type,
                "state": i.state.value,
                "in_flight": len(i.in_flight),
                "concurrency_limit": i.concurrency_limit,
                "node": f"N{i.node_id}",
            }
            for i in sorted(self.instances.values(), key=lambda i: i.id)
        ]
        node_rows = [
            {
                "id": n.label,
                "state": n.state.value,
                "cpu_used": float(n.cpu_used),
                "cpu_capacity": float(n.cpu_capacity),
                "mem_used_mb": n.mem_used_mb,
                "mem_capacity_mb": n.mem_capacity_mb,
                "instances": [f"I{i}" for i in n.hosted_instances],
            }
            for n in sorted(self.nodes.values(), key=lambda n: n.id)
        ]
        terminal = [r for r in self.requests.values() if r.is_terminal]
        terminal.sort(key=lambda r: (r.end_time, r.id))
        recent = [
            {
                "request_id": r.id,
                "status": r.status.value,
                "end_ms": r.end_time,
                "end_to_end_ms": r.end_to_end_ms,
            }
            for r in terminal[-20:]
        ]
        return {
            "time_ms": self.kernel.clock,
            "queue_length": len(self.dispatcher),
            "queue": queue_rows,
            "instances": instance_rows,
            "nodes": node_rows,
            "recent_requests": recent,
            "counters": self.metrics.headline(),
            "session": self.metrics.session(),
            "gauges": self.probe(),
            "config": self.config.to_dict(),
        }

    def metrics_payload(self) -> dict:
        return {
            "time_ms": self.kernel.clock,
            "cumulative": self.metrics.headline(),
            "session": self.metrics.session(),
            "series": self.metrics.series_payload(),
        }

    def export_csv(self) -> str:
        return export_csv(self.requests.values(), self.instances, self.nodes)

    def state_hash(self) -> str:
        blob = json.dumps(
            {
                "snapshot": self.snapshot(),
                "log": [e.to_record() for e in self.kernel.log],
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    # -- control commands ------------------------------------------------------------

    def apply_command(self, command: dict) -> dict:
        """Execute one control command between events; returns the ack payload.

        Config updates take effect at the next event boundary: events already
        scheduled keep their times, only future decisions see the new values.
        """
        kind = command.get("kind")
        if kind == "update_config":
            changes = command.get("changes", {})
            old_mode = self.config.workload.mode
            # the series sampling grid stays fixed for the life of the run
            self.config = self.config.update(changes)
            self._record_command(command)
            self._sync_auto_arrivals(old_mode)
            return {"ok": True, "config": self.config.to_dict()}
        if kind == "inject_requests":
            n = int(command.get("n", 1))
            function_type = command.get("function_type", "f")
            self._record_command(command)
            created = self.inject(n, function_type)
            return {"ok": True, "request_ids": [r.id for r in created]}
        if kind == "fail_node":
            node = command.get("node")
            if node is None:
                raise UnknownNode("fail_node needs a node id")
            record = self.fail_node(node)
            self.command_log.append(self._command_entry(command))
            return {"ok": True, "event": record.to_record()}
        if kind == "reset_session":
            self._record_command(command)
            self.metrics.reset_session()
            return {"ok": True}
        if kind == "export_csv":
            return {"ok": True, "csv": self.export_csv()}
        if kind == "get_state":
            return {"ok": True, "state": self.snapshot()}
        if kind == "get_metrics":
            return {"ok": True, "metrics": self.metrics_payload()}
        raise UnknownCommand(f"unknown command kind {kind!r}")

    def _sync_auto_arrivals(self, old_mode: str) -> None:
        mode = self.config.workload.mode
        if mode == "auto_rate" and self._auto_arrival_event is None:
            self._schedule_next_auto_arrival(self.kernel.clock)
        elif mode != "auto_rate" and self._auto_arrival_event is not None:
            self.kernel.cancel(self._auto_arrival_event)
            self._auto_arrival_event = None

    def _command_entry(self, command: dict) -> dict:
        return {
            "at_ms": self.kernel.clock,
            "after_events": self.processed_events,
            "command": command,
        }

    def _record_command(self, command: dict) -> None:
        self.command_log.append(self._command_entry(command))
        record = self.kernel.append_log_record(
            EventKind.COMMAND_APPLIED, payload={"command": command}
        )
        self._emit(record)


def replay_with_commands(
    config: SimConfig,
    commands: list[dict],
    until: SimTime,
    label: str = "A",
) -> Simulation:
    """Rebuild a run from (config, seed, command log): apply each recorded
    command at the same event boundary it originally ran at."""
    sim = Simulation(config, label=label)
    for entry in commands:
        while sim.processed_events < entry["after_events"]:
            if sim.step() is None:
                break
        if sim.clock < entry["at_ms"]:
            sim.run_until(entry["at_ms"])
        sim.apply_command(entry["command"])
    sim.run_until(until)
    return sim
