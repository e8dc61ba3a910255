"""Metrics engine: counters, session window, sampled series, cost, CSV.

Cost follows the platform's billing shape: (execution_ms / 1000) * memory_mb,
kept as an exact Decimal so cumulative sums never drift. Averages over zero
samples are reported as None (absent), never 0.
"""

from __future__ import annotations

import csv
import io
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .kernel import SimTime
from .lifecycle import FunctionInstance
from .placement import ComputeNode
from .workload import Request, RequestStatus

FAILURE_CAUSES = ("ttl", "exec_timeout", "node_down")

_STATUS_TO_CAUSE = {
    RequestStatus.FAILED_TTL: "ttl",
    RequestStatus.FAILED_EXEC_TIMEOUT: "exec_timeout",
    RequestStatus.FAILED_NODE_DOWN: "node_down",
}


def cost(execution_ms: int, memory_mb: int) -> Decimal:
    """Billing units (MB*seconds) for one completed execution."""
    if execution_ms < 0:
        raise ValueError("execution_ms must be >= 0")
    if memory_mb <= 0:
        raise ValueError("memory_mb must be > 0")
    return Decimal(execution_ms * memory_mb).scaleb(-3)


SERIES_FIELDS = (
    "queue_length",
    "executing",
    "live_instances",
    "active_nodes",
    "cpu_utilisation",
    "mem_utilisation",
    "succeeded",
    "failed",
    "avg_end_to_end_ms",
    "cumulative_cost",
)


class MetricsCollector:
    """Cumulative counters plus a resettable session window and time series.

    The engine feeds it three ways: lifecycle notifications (created /
    dispatched / finished), a state probe sampled on a fixed simulated-time
    grid, and an explicit final flush at the end of a run.
    """

    def __init__(self, sample_interval_ms: int = 250) -> None:
        self.sample_interval_ms = sample_interval_ms
        self.created = 0
        self.succeeded = 0
        self.failed: dict[str, int] = {c: 0 for c in FAILURE_CAUSES}
        self.cumulative_cost = Decimal(0)
        self._e2e_sum = 0
        self._queue_wait_sum = 0
        self._queue_wait_count = 0
        self._exec_sum = 0
        self._session_queue_wait_sum = 0
        self._session_queue_wait_count = 0
        self._session_exec_sum = 0
        self._session_exec_count = 0
        self.series_times: list[SimTime] = []
        self.series: dict[str, list] = {name: [] for name in SERIES_FIELDS}
        self._next_sample_at: SimTime = 0

    # -- lifecycle notifications ------------------------------------------

    def request_created(self) -> None:
        self.created += 1

    def request_dispatched(self, queue_wait_ms: int) -> None:
        self._queue_wait_sum += queue_wait_ms
        self._queue_wait_count += 1
        self._session_queue_wait_sum += queue_wait_ms
        self._session_queue_wait_count += 1

    def request_succeeded(self, request: Request, memory_mb: int) -> None:
        self.succeeded += 1
        execution_ms = request.execution_ms or 0
        self.cumulative_cost += cost(execution_ms, memory_mb)
        self._e2e_sum += request.end_to_end_ms or 0
        self._exec_sum += execution_ms
        self._session_exec_sum += execution_ms
        self._session_exec_count += 1

    def request_failed(self, status: RequestStatus) -> None:
        # failures accrue zero cost: no execution completed
        self.failed[_STATUS_TO_CAUSE[status]] += 1

    def reset_session(self) -> None:
        """Restart the short-term observation window; cumulative data stays."""
        self._session_queue_wait_sum = 0
        self._session_queue_wait_count = 0
        self._session_exec_sum = 0
        self._session_exec_count = 0

    # -- sampling ----------------------------------------------------------

    def flush_samples(self, upto_ms: SimTime, probe: Callable[[], dict]) -> None:
        """Emit samples for every grid point strictly before `upto_ms`.

        Called before an event handler runs: the current state is exactly the
        state at every grid point since the previous event.
        """
        while self._next_sample_at < upto_ms:
            self._take_sample(probe)

    def flush_samples_inclusive(self, upto_ms: SimTime, probe: Callable[[], dict]) -> None:
        while self._next_sample_at <= upto_ms:
            self._take_sample(probe)

    def _take_sample(self, probe: Callable[[], dict]) -> None:
        state = probe()
        self.series_times.append(self._next_sample_at)
        self.series["queue_length"].append(state["queue_length"])
        self.series["executing"].append(state["executing"])
        self.series["live_instances"].append(state["live_instances"])
        self.series["active_nodes"].append(state["active_nodes"])
        self.series["cpu_utilisation"].append(state["cpu_utilisation"])
        self.series["mem_utilisation"].append(state["mem_utilisation"])
        self.series["succeeded"].append(self.succeeded)
        self.series["failed"].append(self.total_failed)
        self.series["avg_end_to_end_ms"].append(_avg(self._e2e_sum, self.succeeded))
        self.series["cumulative_cost"].append(float(self.cumulative_cost))
        self._next_sample_at += self.sample_interval_ms

    # -- reporting ----------------------------------------------------------

    @property
    def total_failed(self) -> int:
        return sum(self.failed.values())

    @property
    def in_system(self) -> int:
        return self.created - self.succeeded - self.total_failed

    def avg_utilisation(self, kind: str) -> Optional[float]:
        values = self.series[f"{kind}_utilisation"]
        return sum(values) / len(values) if values else None

    def headline(self) -> dict:
        """Cumulative totals and averages (None where no samples exist)."""
        return {
            "created": self.created,
            "succeeded": self.succeeded,
            "failed": dict(self.failed),
            "total_failed": self.total_failed,
            "in_system": self.in_system,
            "avg_end_to_end_ms": _avg(self._e2e_sum, self.succeeded),
            "avg_queue_wait_ms": _avg(self._queue_wait_sum, self._queue_wait_count),
            "avg_execution_ms": _avg(self._exec_sum, self.succeeded),
            "avg_cpu_utilisation": self.avg_utilisation("cpu"),
            "avg_mem_utilisation": self.avg_utilisation("mem"),
            "cumulative_cost": str(self.cumulative_cost),
        }

    def session(self) -> dict:
        return {
            "avg_queue_wait_ms": _avg(
                self._session_queue_wait_sum, self._session_queue_wait_count
            ),
            "avg_execution_ms": _avg(self._session_exec_sum, self._session_exec_count),
            "samples": {
                "queue_wait": self._session_queue_wait_count,
                "execution": self._session_exec_count,
            },
        }

    def series_payload(self) -> dict:
        payload = {"t": list(self.series_times)}
        payload.update({name: list(vals) for name, vals in self.series.items()})
        return payload


def _avg(total: int, count: int) -> Optional[float]:
    return total / count if count else None


# -- CSV export --------------------------------------------------------------

REQUEST_COLUMNS = [
    "request_id",
    "function_type",
    "arrival_ms",
    "enqueue_ms",
    "dispatch_ms",
    "exec_start_ms",
    "end_ms",
    "status",
    "queue_wait_ms",
    "execution_ms",
    "end_to_end_ms",
    "cost",
    "instance_id",
    "node_id",
]

INSTANCE_COLUMNS = [
    "instance_id",
    "function_type",
    "node_id",
    "state",
    "created_ms",
    "cold_ready_ms",
    "ended_ms",
    "served_requests",
    "cpu",
    "mem_mb",
]

NODE_COLUMNS = [
    "node_id",
    "state",
    "cpu_capacity",
    "mem_capacity_mb",
    "cpu_used",
    "mem_used_mb",
    "provisioned_ms",
    "activated_ms",
    "ended_ms",
    "hosted_instances",
]


def _opt(value) -> str:
    return "" if value is None else str(value)


def _frac(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return str(float(value))


def request_row(
    request: Request,
    instances: dict[int, FunctionInstance],
    arena: Optional[str] = None,
) -> list[str]:
    instance = (
        instances.get(request.assigned_instance)
        if request.assigned_instance is not None
        else None
    )
    row_cost = ""
    if request.status == RequestStatus.SUCCEEDED and instance is not None:
        row_cost = str(cost(request.execution_ms or 0, instance.demand.mem_mb))
    elif request.is_terminal:
        row_cost = "0"
    row = [
        str(request.id),
        request.function_type,
        str(request.arrival_time),
        _opt(request.enqueue_time),
        _opt(request.dispatch_time),
        _opt(request.exec_start_time),
        _opt(request.end_time),
        request.status.value,
        _opt(request.queue_wait_ms),
        _opt(request.execution_ms),
        _opt(request.end_to_end_ms),
        row_cost,
        instance.label if instance else "",
        f"N{instance.node_id}" if instance else "",
    ]
    if arena is not None:
        row.insert(0, arena)
    return row


def export_csv(
    requests: Iterable[Request],
    instances: dict[int, FunctionInstance],
    nodes: dict[int, ComputeNode],
    arena: Optional[str] = None,
) -> str:
    """Three tables (requests, instances, nodes) separated by blank lines.

    UTF-8, comma-separated, '\\n' line endings; requests ordered by id.
    A battleground export prepends an `arena` column to every table.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")

    def header(columns: list[str]) -> list[str]:
        return (["arena"] + columns) if arena is not None else columns

    writer.writerow(header(REQUEST_COLUMNS))
    for request in sorted(requests, key=lambda r: r.id):
        writer.writerow(request_row(request, instances, arena))

    buf.write("\n")
    writer.writerow(header(INSTANCE_COLUMNS))
    for inst in sorted(instances.values(), key=lambda i: i.id):
        row = [
            inst.label,
            inst.function_type,
            f"N{inst.node_id}",
            inst.state.value,
            str(inst.created_at),
            str(inst.cold_ready_at),
            _opt(inst.ended_at),
            str(inst.served_count),
            _frac(inst.demand.cpu),
            str(inst.demand.mem_mb),
        ]
        if arena is not None:
            row.insert(0, arena)
        writer.writerow(row)

    buf.write("\n")
    writer.writerow(header(NODE_COLUMNS))
    for node in sorted(nodes.values(), key=lambda n: n.id):
        row = [
            node.label,
            node.state.value,
            _frac(node.cpu_capacity),
            str(node.mem_capacity_mb),
            _frac(node.cpu_used),
            str(node.mem_used_mb),
            str(node.provisioned_at),
            _opt(node.activated_at),
            _opt(node.ended_at),
            str(len(node.hosted_instances)),
        ]
        if arena is not None:
            row.insert(0, arena)
        writer.writerow(row)

    return buf.getvalue()
