#!/usr/bin/env python3
"""The seven placement algorithms on the same two-phase workload.

Phase 1 (t=0): a burst of eight warm-up requests forces the fleet out to
four nodes; the instances finish, idle out and are reaped, leaving four
empty-but-active nodes. Phase 2 (t=4000): four long-running probe requests
arrive one by one, and the placement strategy decides where each new
instance lands. Packers fill two nodes; spreaders use all four.

    python3 demos/placement_showdown.py
"""

from faaslab import Simulation, SimConfig, WorkloadSpec
from faaslab.config import ScriptedBurst

STRATEGIES = (
    "first_fit",
    "best_fit",
    "worst_fit",
    "load_balanced",
    "affinity",
    "anti_affinity",
    "cost_optimised",
)


def build_config(strategy: str) -> SimConfig:
    script = [ScriptedBurst(at_ms=0, count=8, function_type="warmup")]
    for i in range(4):
        script.append(ScriptedBurst(at_ms=4000 + 200 * i, count=1, function_type="probe"))
    return SimConfig(
        routing_strategy="warm_priority",
        placement_strategy=strategy,
        cold_start_delay_ms=300,
        exec_base_ms={"warmup": 500, "probe": 5000},
        concurrency_limit=1,
        instance_cpu=1.0,
        instance_mem_mb=256,
        node_cpu=2.0,  # two instances per node
        node_mem_mb=1024,
        max_instances=8,
        max_nodes=4,
        inactivity_timeout_ms=2000,
        request_ttl_ms=30_000,
        workload=WorkloadSpec(
            mode="scenario",
            function_type_mix={"warmup": 1.0, "probe": 1.0},
            script=script,
        ),
        seed=11,
    )


def main():
    print(f"{'strategy':<16} {'probe placement':<28} {'nodes used':>10}")
    for strategy in STRATEGIES:
        sim = Simulation(build_config(strategy))
        sim.run_until(6000)
        probes = [
            i for i in sim.instances.values() if i.function_type == "probe"
        ]
        placement = "  ".join(f"{i.label}->N{i.node_id}" for i in probes)
        nodes_used = len({i.node_id for i in probes})
        print(f"{strategy:<16} {placement:<28} {nodes_used:>10}")
    print()
    print("first/best fit and cost-optimised pack two probes per node;")
    print("worst fit, load-balanced and anti-affinity spread one per node;")
    print("affinity piles onto nodes that already host the same function type.")


if __name__ == "__main__":
    main()
