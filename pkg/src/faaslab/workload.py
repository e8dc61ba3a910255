"""Request model and arrival generation.

Arrivals come from three sources: an automatic rate-driven stream, manual
single-shot injections, and scripted scenario bursts. All three feed the
same gateway path in the engine.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional

from .config import SimConfig, WorkloadSpec
from .errors import InvalidSpec, UnknownScenario
from .kernel import SimTime


class RequestStatus(str, Enum):
    IN_QUEUE = "in_queue"
    DISPATCHED = "dispatched"
    COLD_START_WAIT = "cold_start_wait"
    EXECUTING = "executing"
    SUCCEEDED = "succeeded"
    FAILED_TTL = "failed_ttl"
    FAILED_EXEC_TIMEOUT = "failed_exec_timeout"
    FAILED_NODE_DOWN = "failed_node_down"


TERMINAL_STATUSES = frozenset(
    {
        RequestStatus.SUCCEEDED,
        RequestStatus.FAILED_TTL,
        RequestStatus.FAILED_EXEC_TIMEOUT,
        RequestStatus.FAILED_NODE_DOWN,
    }
)

FAILURE_STATUSES = frozenset(
    {
        RequestStatus.FAILED_TTL,
        RequestStatus.FAILED_EXEC_TIMEOUT,
        RequestStatus.FAILED_NODE_DOWN,
    }
)

QUEUED_STATUSES = frozenset({RequestStatus.IN_QUEUE, RequestStatus.COLD_START_WAIT})


@dataclass
class Request:
    """A unit of work traversing gateway -> dispatcher -> instance."""

    id: int
    function_type: str
    arrival_time: SimTime
    enqueue_time: Optional[SimTime] = None
    dispatch_time: Optional[SimTime] = None
    exec_start_time: Optional[SimTime] = None
    end_time: Optional[SimTime] = None
    status: RequestStatus = RequestStatus.IN_QUEUE
    assigned_instance: Optional[int] = None
    # pending kernel event ids, cancelled when the request leaves the state
    completion_event_id: Optional[int] = None
    timeout_event_id: Optional[int] = None

    @property
    def is_terminal(self) -> bool:
        return self.status in TERMINAL_STATUSES

    @property
    def queue_wait_ms(self) -> Optional[int]:
        if self.dispatch_time is None:
            return None
        if self.enqueue_time is None:
            return 0  # assigned straight off the gateway, never buffered
        return self.dispatch_time - self.enqueue_time

    @property
    def execution_ms(self) -> Optional[int]:
        if self.exec_start_time is None or self.end_time is None:
            return None
        return self.end_time - self.exec_start_time

    @property
    def end_to_end_ms(self) -> Optional[int]:
        if self.end_time is None:
            return None
        return self.end_time - self.arrival_time


def next_arrival(spec: WorkloadSpec, now: SimTime, rng: random.Random) -> SimTime:
    """Time of the next automatic arrival after `now`.

    Jitter 0 gives a gap of exactly 1000/rate ms; jitter j draws the gap
    uniformly from [base*(1-j), base*(1+j)]. Gaps round to >= 1 ms so two
    consecutive auto-arrivals never collapse onto the same tick.
    """
    if spec.mode != "auto_rate":
        raise InvalidSpec("next_arrival requires auto_rate mode")
    if spec.rate <= 0:
        raise InvalidSpec("auto_rate workload requires rate > 0")
    base = 1000.0 / spec.rate
    if spec.jitter > 0:
        gap = rng.uniform(base * (1 - spec.jitter), base * (1 + spec.jitter))
    else:
        gap = base
    return now + max(1, int(gap + 0.5))


def pick_function_type(spec: WorkloadSpec, rng: random.Random) -> str:
    """Weighted choice from the mix; a single-entry mix consumes no draws."""
    types = [t for t, w in spec.function_type_mix.items() if w > 0]
    if len(types) == 1:
        return types[0]
    weights = [spec.function_type_mix[t] for t in types]
    return rng.choices(types, weights=weights, k=1)[0]


# -- bundled scenarios -----------------------------------------------------

BUNDLED_SCENARIOS = (
    "steady-state",
    "cold-start-burst",
    "node-failure-drill",
    "strategy-duel",
)


def _scenario_text(name: str) -> str:
    path = resources.files("faaslab").joinpath("scenarios", f"{name}.json")
    return path.read_text(encoding="utf-8")


def load_scenario_raw(name: str) -> dict:
    """Full scenario document, including any battleground preset."""
    if name not in BUNDLED_SCENARIOS:
        raise UnknownScenario(
            f"unknown scenario {name!r}; bundled: {', '.join(BUNDLED_SCENARIOS)}"
        )
    return json.loads(_scenario_text(name))


def load_scenario(name: str) -> tuple[SimConfig, WorkloadSpec]:
    """Resolve a bundled scenario name into a validated config pair."""
    raw = load_scenario_raw(name)
    config = SimConfig.from_dict(raw["config"])
    config.workload.scenario_name = name
    config.validate()
    return config, config.workload


def load_scenario_or_file(name_or_path: str) -> SimConfig:
    """CLI helper: bundled scenario name, else a JSON config file path."""
    if name_or_path in BUNDLED_SCENARIOS:
        return load_scenario(name_or_path)[0]
    path = Path(name_or_path)
    if not path.exists():
        raise UnknownScenario(
            f"{name_or_path!r} is neither a bundled scenario nor a config file"
        )
    from .config import load_config_file

    return load_config_file(path)
