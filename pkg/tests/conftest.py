import pytest

from faaslab.config import ScriptedBurst, SimConfig, WorkloadSpec


def make_config(**overrides) -> SimConfig:
    """Small deterministic config for trace tests: manual workload, one
    function type, generous limits unless overridden."""
    workload = overrides.pop("workload", WorkloadSpec(mode="manual"))
    config = SimConfig(
        routing_strategy="warm_priority",
        placement_strategy="first_fit",
        cold_start_delay_ms=1000,
        exec_base_ms={"f": 500},
        exec_jitter=0.0,
        concurrency_limit=1,
        instance_cpu=1.0,
        instance_mem_mb=128,
        node_cpu=4.0,
        node_mem_mb=2048,
        max_instances=4,
        max_nodes=2,
        inactivity_timeout_ms=60_000,
        request_ttl_ms=60_000,
        max_execution_timeout_ms=120_000,
        workload=workload,
        seed=1,
    )
    for key, value in overrides.items():
        setattr(config, key, value)
    config.validate()
    return config


def burst_config(count: int, at_ms: int = 0, **overrides) -> SimConfig:
    workload = WorkloadSpec(
        mode="scenario", script=[ScriptedBurst(at_ms=at_ms, count=count)]
    )
    return make_config(workload=workload, **overrides)


@pytest.fixture
def config():
    return make_config()
