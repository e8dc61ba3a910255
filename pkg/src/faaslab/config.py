"""Simulation configuration: every tunable parameter for one arena.

Scenario files and control-service payloads use the same JSON field names
as these dataclasses, so round-tripping is mechanical.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import InvalidConfig, InvalidSpec

ROUTING_STRATEGIES = ("warm_priority", "round_robin", "least_connections")
PLACEMENT_STRATEGIES = (
    "first_fit",
    "best_fit",
    "worst_fit",
    "load_balanced",
    "affinity",
    "anti_affinity",
    "cost_optimised",
)
WORKLOAD_MODES = ("auto_rate", "manual", "scenario")


@dataclass
class ScriptedBurst:
    """One scripted arrival burst: `count` requests of one type at `at_ms`."""

    at_ms: int
    count: int = 1
    function_type: str = "f"


@dataclass
class ScriptedFailure:
    """A node failure injected at a fixed simulated time."""

    node: str
    at_ms: int


@dataclass
class WorkloadSpec:
    """How arrivals are generated.

    auto_rate: rate-driven stream with optional uniform inter-arrival jitter.
    manual:    only explicit inject commands produce requests.
    scenario:  arrivals follow the `script` burst list.
    """

    mode: str = "auto_rate"
    rate: float = 1.0  # requests per second (auto_rate mode)
    jitter: float = 0.0  # +/- fraction applied to the inter-arrival gap
    function_type_mix: dict[str, float] = field(default_factory=lambda: {"f": 1.0})
    scenario_name: Optional[str] = None
    script: list[ScriptedBurst] = field(default_factory=list)

    def validate(self) -> None:
        if self.mode not in WORKLOAD_MODES:
            raise InvalidSpec(f"unknown workload mode {self.mode!r}")
        if self.mode == "auto_rate" and self.rate <= 0:
            raise InvalidSpec("auto_rate workload requires rate > 0")
        if not 0.0 <= self.jitter <= 1.0:
            raise InvalidSpec("jitter must be a fraction in [0, 1]")
        if not self.function_type_mix:
            raise InvalidSpec("function_type_mix must not be empty")
        if any(w < 0 for w in self.function_type_mix.values()):
            raise InvalidSpec("function type weights must be non-negative")
        if all(w == 0 for w in self.function_type_mix.values()):
            raise InvalidSpec("function type weights must not all be zero")
        for burst in self.script:
            if burst.at_ms < 0 or burst.count < 1:
                raise InvalidSpec("script bursts need at_ms >= 0 and count >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "WorkloadSpec":
        data = dict(data)
        script = [_build(ScriptedBurst, b) for b in data.pop("script", [])]
        spec = _build(cls, data)
        spec.script = script
        return spec


@dataclass
class SimConfig:
    """All tunables for one simulation arena."""

    routing_strategy: str = "warm_priority"
    placement_strategy: str = "first_fit"
    cold_start_delay_ms: int = 1000
    exec_base_ms: dict[str, int] = field(default_factory=lambda: {"f": 500})
    exec_jitter: float = 0.0
    concurrency_limit: int = 1
    instance_cpu: float = 1.0
    instance_mem_mb: int = 128
    node_cpu: float = 4.0
    node_mem_mb: int = 2048
    max_instances: int = 10  # per function type
    max_nodes: int = 3
    inactivity_timeout_ms: int = 10_000
    request_ttl_ms: int = 10_000
    max_execution_timeout_ms: int = 30_000
    timeout_kills_instance: bool = True
    scale_up_on_busy: bool = True
    node_startup_delay_ms: int = 0
    sample_interval_ms: int = 250
    snapshot_interval_ms: int = 2000
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    fail_node_at: list[ScriptedFailure] = field(default_factory=list)
    seed: int = 1
    pace: float = 0.0  # simulated ms per wall second; 0 = as fast as possible

    def validate(self) -> None:
        if self.routing_strategy not in ROUTING_STRATEGIES:
            raise InvalidConfig(f"unknown routing strategy {self.routing_strategy!r}")
        if self.placement_strategy not in PLACEMENT_STRATEGIES:
            raise InvalidConfig(
                f"unknown placement strategy {self.placement_strategy!r}"
            )
        for name, value in (
            ("cold_start_delay_ms", self.cold_start_delay_ms),
            ("inactivity_timeout_ms", self.inactivity_timeout_ms),
            ("node_startup_delay_ms", self.node_startup_delay_ms),
            ("pace", self.pace),
        ):
            if value < 0:
                raise InvalidConfig(f"{name} must be >= 0")
        for name, value in (
            ("request_ttl_ms", self.request_ttl_ms),
            ("max_execution_timeout_ms", self.max_execution_timeout_ms),
            ("sample_interval_ms", self.sample_interval_ms),
            ("snapshot_interval_ms", self.snapshot_interval_ms),
        ):
            if value <= 0:
                raise InvalidConfig(f"{name} must be > 0")
        for name, value in (
            ("concurrency_limit", self.concurrency_limit),
            ("max_instances", self.max_instances),
            ("max_nodes", self.max_nodes),
        ):
            if value < 1:
                raise InvalidConfig(f"{name} must be >= 1")
        if not self.exec_base_ms:
            raise InvalidConfig("exec_base_ms must define at least one function type")
        if any(ms < 0 for ms in self.exec_base_ms.values()):
            raise InvalidConfig("execution base times must be >= 0")
        if not 0.0 <= self.exec_jitter <= 1.0:
            raise InvalidConfig("exec_jitter must be a fraction in [0, 1]")
        if self.instance_cpu <= 0 or self.instance_mem_mb <= 0:
            raise InvalidConfig("instance demand must be strictly positive")
        if self.node_cpu <= 0 or self.node_mem_mb <= 0:
            raise InvalidConfig("node capacity must be strictly positive")
        if self.instance_cpu > self.node_cpu or self.instance_mem_mb > self.node_mem_mb:
            raise InvalidConfig("instance demand must fit within node capacity")
        self.workload.validate()
        for ftype in self.workload.function_type_mix:
            if ftype not in self.exec_base_ms:
                raise InvalidConfig(f"no exec_base_ms entry for function type {ftype!r}")
        for burst in self.workload.script:
            if burst.function_type not in self.exec_base_ms:
                raise InvalidConfig(
                    f"no exec_base_ms entry for function type {burst.function_type!r}"
                )
        for failure in self.fail_node_at:
            if failure.at_ms < 0:
                raise InvalidConfig("scripted failures need at_ms >= 0")

    # -- serialisation ----------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        data = dict(data)
        workload = data.pop("workload", None)
        failures = [_build(ScriptedFailure, f) for f in data.pop("fail_node_at", [])]
        config = _build(cls, data)
        if workload is not None:
            config.workload = WorkloadSpec.from_dict(workload)
        config.fail_node_at = failures
        return config

    def update(self, changes: dict[str, Any]) -> "SimConfig":
        """Return a validated copy with `changes` merged in.

        `workload` may itself be a partial dict; unknown keys raise
        InvalidConfig rather than being silently dropped.
        """
        merged = copy.deepcopy(self)
        for key, value in changes.items():
            if key == "workload":
                if not isinstance(value, dict):
                    raise InvalidConfig("workload update must be an object")
                for wkey, wvalue in value.items():
                    if wkey == "script":
                        merged.workload.script = [_build(ScriptedBurst, b) for b in wvalue]
                    elif not hasattr(merged.workload, wkey):
                        raise InvalidConfig(f"unknown workload field {wkey!r}")
                    else:
                        setattr(merged.workload, wkey, wvalue)
            elif key == "fail_node_at":
                merged.fail_node_at = [_build(ScriptedFailure, f) for f in value]
            elif not hasattr(merged, key):
                raise InvalidConfig(f"unknown config field {key!r}")
            else:
                setattr(merged, key, value)
        merged.validate()
        return merged


def _build(cls, data: dict):
    """Construct a dataclass from a dict, rejecting unknown keys."""
    fields = {f for f in cls.__dataclass_fields__}
    unknown = set(data) - fields
    if unknown:
        raise InvalidConfig(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return cls(**data)


def load_config_file(path: str | Path) -> SimConfig:
    """Read a config/scenario JSON file; accepts either a bare SimConfig
    object or a scenario wrapper with a top-level "config" key."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if "config" in raw:
        raw = raw["config"]
    config = SimConfig.from_dict(raw)
    config.validate()
    return config
