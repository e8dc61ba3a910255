"""Failure semantics: queue TTL expiry, execution timeout, node failure.

These operate on a live Simulation between or inside event handlers; all
cancellation goes through kernel tombstones so the event order already
committed to the log never changes.
"""

from __future__ import annotations

from .errors import NodeNotActive, UnknownNode
from .kernel import SimEvent
from .lifecycle import InstanceState
from .placement import NodeState
from .workload import RequestStatus


def expire_ttl(sim, event: SimEvent) -> None:
    """Fail a request that is still queued when its TTL fires.

    A request dispatched before the deadline has its expiry cancelled, so a
    live expiry event always refers to a queued request; anything else is a
    stale tombstone race and is ignored.
    """
    request_id = event.subject
    if not sim.dispatcher.is_queued(request_id):
        return
    sim.dispatcher.remove(request_id)
    request = sim.requests[request_id]
    request.status = RequestStatus.FAILED_TTL
    request.end_time = sim.kernel.clock
    sim.metrics.request_failed(request.status)
    event.payload = {"cause": "ttl"}


def execution_timeout(sim, instance, event: SimEvent) -> None:
    """A request exceeded the execution limit: every request on that
    instance fails, and (by default) the instance itself is killed."""
    now = sim.kernel.clock
    victims = list(instance.in_flight)
    for request_id in victims:
        request = sim.requests[request_id]
        sim.kernel.cancel(request.completion_event_id)
        sim.kernel.cancel(request.timeout_event_id)
        request.completion_event_id = None
        request.timeout_event_id = None
        request.status = RequestStatus.FAILED_EXEC_TIMEOUT
        request.end_time = now
        sim.metrics.request_failed(request.status)
    instance.in_flight.clear()

    killed = sim.config.timeout_kills_instance
    if killed:
        instance.state = InstanceState.FAILED
        instance.ended_at = now
        node = sim.nodes[instance.node_id]
        node.release(instance.demand, instance.id)
        if not node.hosted_instances:
            node.last_active_at = now
    else:
        instance.state = InstanceState.WARM
        instance.last_idle_since = now

    event.payload = {
        "instance": instance.label,
        "failed_requests": victims,
        "instance_killed": killed,
    }
    sim.drain()
    if killed:
        sim.rescale_for_queue()
    sim.ensure_inactivity_check()


def fail_node(sim, node_id: int, event: SimEvent) -> None:
    """Immediate infrastructure failure of one Active node.

    Hosted instances and their in-flight requests fail; queued requests are
    untouched (they are not bound to a node) and the dispatcher afterwards
    provisions replacement capacity for them where limits allow.
    """
    node = sim.nodes.get(node_id)
    if node is None:
        raise UnknownNode(f"no node N{node_id}")
    if node.state != NodeState.ACTIVE:
        raise NodeNotActive(f"N{node_id} is {node.state.value}, not active")

    now = sim.kernel.clock
    node.state = NodeState.FAILED
    node.ended_at = now

    failed_instances: list[str] = []
    failed_requests: list[int] = []
    for instance_id in list(node.hosted_instances):
        instance = sim.instances[instance_id]
        if not instance.is_live:
            continue
        sim.kernel.cancel(instance.cold_event_id)
        instance.cold_event_id = None
        for request_id in list(instance.in_flight):
            request = sim.requests[request_id]
            sim.kernel.cancel(request.completion_event_id)
            sim.kernel.cancel(request.timeout_event_id)
            request.completion_event_id = None
            request.timeout_event_id = None
            request.status = RequestStatus.FAILED_NODE_DOWN
            request.end_time = now
            sim.metrics.request_failed(request.status)
            failed_requests.append(request_id)
        instance.in_flight.clear()
        instance.state = InstanceState.FAILED
        instance.ended_at = now
        failed_instances.append(instance.label)

    event.payload = {
        "node": node.label,
        "failed_instances": failed_instances,
        "failed_requests": failed_requests,
    }
    sim.drain()
    sim.rescale_for_queue()
    sim.ensure_inactivity_check()
