"""Acceptance suite: the ten primary exit criteria.

Each test prints one PASS/FAIL line (visible with `pytest -s` or in captured
output). Tolerances are pinned here: the engine is deterministic, so every
schedule comparison is exact (0 ms) and every cost comparison is exact
decimal equality.
"""

import json
import random
import time
from contextlib import contextmanager
from decimal import Decimal

from fastapi.testclient import TestClient

from faaslab.battleground import Battleground, from_scenario
from faaslab.cli import main as cli_main
from faaslab.config import ScriptedBurst, WorkloadSpec
from faaslab.dispatch import Dispatcher, RoutingOutcome
from faaslab.engine import Simulation
from faaslab.lifecycle import FunctionInstance, InstanceState
from faaslab.metrics import cost
from faaslab.placement import ResourceDemand, select_node
from faaslab.service import SimulationService, create_app
from faaslab.workload import RequestStatus, load_scenario, load_scenario_raw

from conftest import burst_config, make_config
from test_engine import InvariantWatcher
from test_metrics import reaggregate
from test_placement import ALL_STRATEGIES, oracle_select, random_cluster


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except Exception:
        print(f"[ACCEPTANCE] criterion {number:2d} FAIL  {description}")
        raise
    print(f"[ACCEPTANCE] criterion {number:2d} PASS  {description}")


# -- 1: determinism ------------------------------------------------------------


def test_criterion_1_determinism(tmp_path):
    with criterion(1, "seeded CLI runs are byte-identical and fast"):
        outputs = []
        for name in ("one", "two"):
            out = tmp_path / name
            started = time.monotonic()
            code = cli_main(
                [
                    "run",
                    "--scenario",
                    "steady-state",
                    "--until",
                    "60000",
                    "--seed",
                    "7",
                    "--out",
                    str(out),
                ]
            )
            elapsed = time.monotonic() - started
            assert code == 0
            assert elapsed < 5.0, f"run took {elapsed:.2f}s"
            outputs.append(out)
        first, second = outputs
        assert (first / "events.ndjson").read_bytes() == (
            second / "events.ndjson"
        ).read_bytes()
        assert (first / "export.csv").read_bytes() == (
            second / "export.csv"
        ).read_bytes()


# -- 2: placement oracle ----------------------------------------------------------


def test_criterion_2_placement_oracle():
    with criterion(2, "7 placement strategies match brute force on 1000+ clusters"):
        rng = random.Random(20_240_817)
        cases = 0
        for _ in range(1100):
            nodes, demand, type_hosts = random_cluster(rng)
            for strategy in ALL_STRATEGIES:
                expected = oracle_select(nodes, demand, strategy, type_hosts)
                actual = select_node(nodes, demand, "f", strategy, type_hosts)
                assert actual == expected, (strategy, nodes, demand)
            cases += 1
        assert cases >= 1000


# -- 3: routing properties -----------------------------------------------------------


def _random_instances(rng, max_n=6):
    instances = []
    for iid in range(1, rng.randint(0, max_n) + 1):
        limit = rng.randint(1, 4)
        state = rng.choice(
            [InstanceState.WARM, InstanceState.BUSY, InstanceState.COLD_STARTING]
        )
        in_flight = list(range(rng.randint(1, limit))) if state == InstanceState.BUSY else []
        inst = FunctionInstance(
            id=iid,
            function_type="f",
            node_id=1,
            concurrency_limit=limit,
            demand=ResourceDemand.of(1, 128),
            created_at=0,
            cold_ready_at=0,
            state=state,
        )
        inst.in_flight = in_flight
        instances.append(inst)
    return instances


def test_criterion_3_routing_properties():
    with criterion(3, "routing: FIFO, slot bounds, RR fairness, LC argmin (1e5 draws)"):
        rng = random.Random(31_337)
        decisions = 0
        from faaslab.workload import Request

        probe = Request(1, "f", 0)

        # least-connections argmin + assignment legality
        lc_config = make_config(routing_strategy="least_connections")
        for _ in range(40_000):
            instances = _random_instances(rng)
            decision = Dispatcher().route(probe, instances, lc_config)
            decisions += 1
            eligible = [
                i
                for i in instances
                if i.state != InstanceState.COLD_STARTING and i.free_slots > 0
            ]
            if decision.outcome == RoutingOutcome.ASSIGN:
                chosen = next(i for i in instances if i.id == decision.instance_id)
                assert chosen.free_slots > 0
                assert chosen.state != InstanceState.COLD_STARTING
                best = min(eligible, key=lambda i: (len(i.in_flight), i.id))
                assert (len(chosen.in_flight), chosen.id) == (
                    len(best.in_flight),
                    best.id,
                )
            else:
                assert not eligible

        # warm-priority picks the lowest warm id or declines
        wp_config = make_config(routing_strategy="warm_priority")
        for _ in range(30_000):
            instances = _random_instances(rng)
            decision = Dispatcher().route(probe, instances, wp_config)
            decisions += 1
            warm = [
                i
                for i in instances
                if i.state == InstanceState.WARM and i.free_slots > 0
            ]
            if warm:
                assert decision.outcome == RoutingOutcome.ASSIGN
                assert decision.instance_id == min(w.id for w in warm)
            else:
                assert decision.outcome != RoutingOutcome.ASSIGN

        # round robin never violates slots; stateful rotation checked below
        rr_config = make_config(routing_strategy="round_robin")
        dispatcher = Dispatcher()
        for _ in range(30_000):
            instances = _random_instances(rng)
            decision = dispatcher.route(probe, instances, rr_config)
            decisions += 1
            if decision.outcome == RoutingOutcome.ASSIGN:
                chosen = next(i for i in instances if i.id == decision.instance_id)
                assert chosen.free_slots > 0
                assert chosen.state != InstanceState.COLD_STARTING
        assert decisions >= 100_000

        # round-robin exact fairness: k warm instances, m*k requests => m each
        for k in (2, 3, 5):
            m = 40
            dispatcher = Dispatcher()
            warm_set = [
                FunctionInstance(
                    id=iid,
                    function_type="f",
                    node_id=1,
                    concurrency_limit=10**9,
                    demand=ResourceDemand.of(1, 128),
                    created_at=0,
                    cold_ready_at=0,
                    state=InstanceState.WARM,
                )
                for iid in range(1, k + 1)
            ]
            counts = {i: 0 for i in range(1, k + 1)}
            for _ in range(m * k):
                decision = dispatcher.route(probe, warm_set, rr_config)
                counts[decision.instance_id] += 1
            assert all(c == m for c in counts.values()), counts

        # FIFO through the engine: enqueue order equals dispatch order,
        # except requests that fail by TTL first
        config = burst_config(
            30, max_instances=2, max_nodes=1, request_ttl_ms=4000
        )
        sim = Simulation(config)
        InvariantWatcher(sim)
        sim.run_until(30_000)
        enqueued = [r for r in sim.requests.values() if r.enqueue_time is not None]
        for a in enqueued:
            for b in enqueued:
                if (a.enqueue_time, a.id) < (b.enqueue_time, b.id):
                    if a.dispatch_time is not None and b.dispatch_time is not None:
                        assert a.dispatch_time <= b.dispatch_time
                    elif a.dispatch_time is None:
                        # a never dispatched: it must have died by TTL, and b
                        # behind it can only have died too
                        assert a.status == RequestStatus.FAILED_TTL
                        assert b.dispatch_time is None


# -- 4: cold-start reproduction ---------------------------------------------------------


def test_criterion_4_cold_start_schedule():
    with criterion(4, "cold-start burst matches the hand schedule at 0 ms tolerance"):
        config, _ = load_scenario("cold-start-burst")
        assert config.cold_start_delay_ms == 1000
        assert config.exec_base_ms == {"f": 500}
        assert config.concurrency_limit == 1
        assert config.max_instances == 2
        sim = Simulation(config)
        sim.run_until(60_000)
        requests = [sim.requests[i] for i in range(1, 11)]
        # two instances cold-start together, then ping-pong 500 ms services
        hand_schedule = [1000, 1000, 1500, 1500, 2000, 2000, 2500, 2500, 3000, 3000]
        assert [r.queue_wait_ms for r in requests] == hand_schedule
        cold_served = [r for r in requests if r.id in (1, 2)]
        for r in cold_served:
            assert r.dispatch_time - r.enqueue_time >= config.cold_start_delay_ms
        assert all(r.status == RequestStatus.SUCCEEDED for r in requests)


# -- 5: scaling reproduction ----------------------------------------------------------


def test_criterion_5_scaling_rise_and_decay():
    with criterion(5, "instances ramp to the cap and decay to zero on schedule"):
        inactivity = 2000
        cadence = 500
        config = make_config(
            workload=WorkloadSpec(
                mode="scenario",
                script=[ScriptedBurst(at_ms=200 * i, count=1) for i in range(10)],
            ),
            cold_start_delay_ms=500,
            exec_base_ms={"f": 300},
            max_instances=3,
            max_nodes=1,
            inactivity_timeout_ms=inactivity,
        )
        sim = Simulation(config)
        watcher = InvariantWatcher(sim)
        sim.run_until(20_000)

        assert watcher.max_live_instances == 3
        assert all(r.status == RequestStatus.SUCCEEDED for r in sim.requests.values())
        last_completion = max(r.end_time for r in sim.requests.values())

        def grid_ceil(t):
            return -(-t // cadence) * cadence

        for inst in sim.instances.values():
            assert inst.state == InstanceState.TERMINATED
            own_last = max(
                r.end_time
                for r in sim.requests.values()
                if r.assigned_instance == inst.id
            )
            assert inst.ended_at == grid_ceil(own_last + inactivity)
        # decay bound: gone within inactivity + one sweep after last completion
        assert max(i.ended_at for i in sim.instances.values()) <= (
            last_completion + inactivity + cadence
        )
        assert sum(1 for i in sim.instances.values() if i.is_live) == 0
        [node] = sim.nodes.values()
        assert node.state.value == "deprovisioned"


# -- 6: failure semantics ---------------------------------------------------------------


def test_criterion_6_failure_semantics(tmp_path):
    with criterion(6, "scripted node failure: exact cascade, rerouting, closure"):
        # CLI route: scripted --fail-node against a drill config without the
        # embedded failure
        config, _ = load_scenario("node-failure-drill")
        config = config.update({"fail_node_at": []})
        config_path = tmp_path / "drill.json"
        config_path.write_text(json.dumps(config.to_dict()))
        out = tmp_path / "out"
        code = cli_main(
            [
                "run",
                "--scenario",
                str(config_path),
                "--until",
                "20000",
                "--fail-node",
                "N1@5000",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        events = [
            json.loads(l) for l in (out / "events.ndjson").read_text().splitlines()
        ]
        failure = next(e for e in events if e["kind"] == "node_failed")
        assert failure["time"] == 5000
        # exactly f = 3 in-flight requests fail at t=5000
        assert sorted(failure["payload"]["failed_requests"]) == [1, 2, 3]

        # in-process replica for per-event accounting closure
        sim = Simulation(
            config.update(
                {"fail_node_at": [{"node": "N1", "at_ms": 5000}]}
            )
        )
        InvariantWatcher(sim)  # asserts closure after every event
        sim.run_until(20_000)
        downed = [
            r
            for r in sim.requests.values()
            if r.status == RequestStatus.FAILED_NODE_DOWN
        ]
        assert len(downed) == 3
        assert all(r.end_time == 5000 for r in downed)
        # no post-failure assignment to the dead node's instances
        dead_instances = {
            i.id for i in sim.instances.values() if i.node_id == 1
        }
        for r in sim.requests.values():
            if r.dispatch_time is not None and r.dispatch_time > 5000:
                assert r.assigned_instance not in dead_instances
        # the follow-up request succeeds on a replacement node
        r4 = sim.requests[4]
        assert r4.status == RequestStatus.SUCCEEDED
        assert sim.instances[r4.assigned_instance].node_id == 2


# -- 7: cost model ----------------------------------------------------------------------


def test_criterion_7_cost_model():
    with criterion(7, "cumulative cost equals the exact per-request formula"):
        assert cost(2000, 128) == Decimal(256)
        config, _ = load_scenario("steady-state")
        sim = Simulation(config)
        sim.run_until(60_000)
        succeeded = [
            r for r in sim.requests.values() if r.status == RequestStatus.SUCCEEDED
        ]
        assert len(succeeded) >= 100
        expected = sum(
            (
                cost(r.execution_ms, sim.instances[r.assigned_instance].demand.mem_mb)
                for r in succeeded
            ),
            start=Decimal(0),
        )
        assert sim.metrics.cumulative_cost == expected  # exact decimal equality


# -- 8: TTL overflow ---------------------------------------------------------------------


def test_criterion_8_ttl_overflow_exact():
    with criterion(8, "TTL failure count equals the hand-derived overflow"):
        # capacity: first dispatch at 1000 (cold), then one per 1000 ms; with
        # TTL 4500 the served set is {dispatch < 4500} = 4 requests
        burst, ttl_ms, cold_ms, exec_ms = 20, 4500, 1000, 1000
        config = burst_config(
            burst,
            max_instances=1,
            max_nodes=1,
            cold_start_delay_ms=cold_ms,
            exec_base_ms={"f": exec_ms},
            request_ttl_ms=ttl_ms,
        )
        served_by_hand = len(
            [k for k in range(burst) if cold_ms + k * exec_ms < ttl_ms]
        )
        overflow_by_hand = burst - served_by_hand
        sim = Simulation(config)
        sim.run_until(30_000)
        assert sim.metrics.failed["ttl"] == overflow_by_hand == 16
        assert sim.metrics.succeeded == served_by_hand == 4
        # FIFO shape: the head of the queue survived, the tail expired
        assert sorted(
            r.id for r in sim.requests.values() if r.status == RequestStatus.SUCCEEDED
        ) == [1, 2, 3, 4]
        assert all(
            sim.requests[i].status == RequestStatus.FAILED_TTL for i in range(5, 21)
        )


# -- 9: battleground -----------------------------------------------------------------------


def test_criterion_9_battleground():
    with criterion(9, "battleground: paired series, duel direction, isolation"):
        # identical configs -> identical paired series
        config = make_config(
            workload=WorkloadSpec(mode="auto_rate", rate=5.0, jitter=0.3)
        )
        bg = Battleground(config, config.update({}), shared_workload_seed=7)
        bg.run_until(20_000)
        series = bg.report()["series"]
        for name, pair in series.items():
            if name != "t":
                assert pair["a"] == pair["b"], name

        # bundled duel: warm priority's cold starts never exceed round robin's
        duel = from_scenario(load_scenario_raw("strategy-duel"), seed=7)
        duel.run_until(30_000)
        assert duel.arena_a.config.routing_strategy == "warm_priority"
        assert duel.arena_b.config.routing_strategy == "round_robin"
        assert duel.cold_start_count("A") <= duel.cold_start_count("B")

        # isolation: A-only commands leave B's state hash untouched
        probe = Battleground(config, config.update({}), shared_workload_seed=9)
        probe.run_until(5000)
        before = probe.arena_b.state_hash()
        probe.arena_a.apply_command(
            {"kind": "inject_requests", "n": 3, "function_type": "f"}
        )
        probe.arena_a.apply_command(
            {"kind": "update_config", "changes": {"cold_start_delay_ms": 1}}
        )
        probe.arena_a.fail_node("N1")
        assert probe.arena_b.state_hash() == before
        assert probe.arena_a.state_hash() != before


# -- 10: CSV round-trip -----------------------------------------------------------------------


def test_criterion_10_csv_round_trip():
    with criterion(10, "independent CSV parser reproduces GET /metrics"):
        config = make_config(
            workload=WorkloadSpec(mode="auto_rate", rate=6.0, jitter=0.3),
            exec_base_ms={"f": 700},
            exec_jitter=0.2,
            max_instances=3,
            max_nodes=2,
            request_ttl_ms=2000,
            inactivity_timeout_ms=3000,
        )
        service = SimulationService(config)
        try:
            client = TestClient(create_app(service))
            client.post("/command", json={"kind": "advance", "until_ms": 45_000})
            blob = client.get("/export.csv").text
            metrics = client.get("/metrics").json()["cumulative"]
            derived = reaggregate(blob)
            for key in (
                "created",
                "succeeded",
                "failed",
                "total_failed",
                "avg_end_to_end_ms",
                "avg_queue_wait_ms",
                "avg_execution_ms",
            ):
                assert derived[key] == metrics[key], key
            assert Decimal(derived["cumulative_cost"]) == Decimal(
                metrics["cumulative_cost"]
            )
            assert metrics["total_failed"] > 0  # the scenario exercises failures
        finally:
            service.close()
