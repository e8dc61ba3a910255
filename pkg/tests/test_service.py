"""Control service: commands, snapshots, exports, the event stream, pacing."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from faaslab.config import ScriptedBurst, WorkloadSpec
from faaslab.engine import Simulation, replay_with_commands
from faaslab.service import SimulationService, create_app

from conftest import make_config


def scripted_config(**overrides):
    workload = WorkloadSpec(
        mode="scenario",
        script=[
            ScriptedBurst(at_ms=0, count=3),
            ScriptedBurst(at_ms=3000, count=1),
        ],
    )
    return make_config(workload=workload, max_instances=2, **overrides)


@pytest.fixture
def harness():
    service = SimulationService(scripted_config())
    client = TestClient(create_app(service))
    yield client, service
    service.close()


def sse_messages(client, limit, after=0):
    response = client.get("/events", params={"limit": limit, "after": after})
    assert response.status_code == 200
    messages = []
    for line in response.text.split("\n"):
        if line.startswith("data: "):
            messages.append(json.loads(line[len("data: "):]))
    return messages


# -- basic command round-trips ---------------------------------------------------


def test_start_then_state_shows_entities(harness):
    client, service = harness
    assert client.post("/command", json={"kind": "start"}).json()["running"] is True
    deadline = time.monotonic() + 5
    while time.monotonic() < deadline:
        state = client.get("/state").json()
        if state["counters"]["created"] >= 3:
            break
        time.sleep(0.01)
    assert state["counters"]["created"] >= 3
    assert "queue_length" in state
    assert state["nodes"], "node table missing"
    client.post("/command", json={"kind": "pause"})


def test_advance_is_deterministic_control(harness):
    client, service = harness
    result = client.post("/command", json={"kind": "advance", "until_ms": 10_000}).json()
    assert result["time_ms"] == 10_000
    state = client.get("/state").json()
    assert state["time_ms"] == 10_000
    assert state["counters"]["created"] == 4
    assert state["counters"]["succeeded"] == 4


def test_export_csv_delegates_byte_for_byte(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 5000})
    via_http = client.get("/export.csv").text
    via_command = service.submit({"kind": "get_export"})["csv"]
    assert via_http == via_command
    assert via_http.startswith("request_id,")


def test_metrics_endpoint_shape(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 8000})
    payload = client.get("/metrics").json()
    assert payload["cumulative"]["created"] == 4
    assert payload["series"]["t"][0] == 0
    assert payload["series"]["t"] == list(range(0, 8001, 250))


def test_inject_and_fail_node_commands(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 2000})
    ack = client.post(
        "/command", json={"kind": "inject_requests", "n": 2, "function_type": "f"}
    ).json()
    assert ack["request_ids"] == [4, 5]
    ack = client.post("/command", json={"kind": "fail_node", "node": "N1"}).json()
    assert ack["event"]["kind"] == "node_failed"
    state = client.get("/state").json()
    assert state["nodes"][0]["state"] == "failed"


def test_invalid_and_unknown_commands_rejected(harness):
    client, _ = harness
    response = client.post(
        "/command", json={"kind": "update_config", "changes": {"max_nodes": 0}}
    )
    assert response.status_code == 400
    assert response.json()["detail"]["error"] == "InvalidConfig"
    assert client.post("/command", json={"kind": "warp"}).status_code == 400
    assert client.post("/command", json={"kind": "fail_node", "node": "N9"}).status_code == 400


def test_reset_discards_entities_and_stats(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 5000})
    assert client.get("/state").json()["counters"]["created"] > 0
    client.post("/command", json={"kind": "reset"})
    state = client.get("/state").json()
    assert state["time_ms"] == 0
    assert state["counters"]["created"] == 0
    assert state["instances"] == []


# -- config boundary semantics ------------------------------------------------------


def test_update_config_applies_only_to_future_decisions(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 500})
    # I1 is mid cold start (ready at 1000); change the delay under it
    client.post(
        "/command",
        json={
            "kind": "update_config",
            "changes": {"cold_start_delay_ms": 2500, "exec_base_ms": {"f": 500, "g": 500}},
        },
    )
    client.post("/command", json={"kind": "inject_requests", "n": 1, "function_type": "g"})
    client.post("/command", json={"kind": "advance", "until_ms": 10_000})
    state = client.get("/state").json()
    instances = {row["id"]: row for row in state["instances"]}
    sim = service.engine
    # in-flight cold start kept its original completion time
    assert sim.instances[1].cold_ready_at == 1000
    # the instance provisioned after the update uses the new delay
    new_instance = next(
        i for i in sim.instances.values() if i.function_type == "g"
    )
    assert new_instance.cold_ready_at == new_instance.created_at + 2500


def test_updated_rate_shapes_future_arrivals_only():
    config = make_config(workload=WorkloadSpec(mode="auto_rate", rate=2.0))
    service = SimulationService(config)
    try:
        service.submit({"kind": "advance", "until_ms": 2000})
        service.submit({"kind": "update_config", "changes": {"workload": {"rate": 10.0}}})
        service.submit({"kind": "advance", "until_ms": 4000})
        arrivals = sorted(r.arrival_time for r in service.engine.requests.values())
        early = [t for t in arrivals if t <= 2000]
        late = [t for t in arrivals if 2500 <= t <= 4000]
        assert early == [500, 1000, 1500, 2000]
        # the already-scheduled arrival at 2500 keeps its slot; 100 ms gaps after
        gaps = {b - a for a, b in zip(late, late[1:])}
        assert gaps == {100}
    finally:
        service.close()


# -- event stream ----------------------------------------------------------------------


def test_stream_consistency_ordered_and_gap_free(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 10_000})
    available = len(service.messages)
    messages = sse_messages(client, limit=available)
    # transport sequence is dense and strictly increasing (gap detection works)
    assert [m["seq"] for m in messages] == list(range(1, available + 1))
    events = [m for m in messages if m["type"] == "event"]
    times = [m["event"]["time"] for m in events]
    assert times == sorted(times)  # delivered in processing order
    event_ids = [m["event"]["id"] for m in events]
    assert len(set(event_ids)) == len(event_ids)  # nothing delivered twice
    # every issued id is either delivered, cancelled, or still pending:
    # no non-cancelled event is ever lost
    kernel = service.engine.kernel
    pending = {e.id for _, eid, e in kernel._heap if eid not in kernel._cancelled}
    issued = set(range(1, kernel._next_id))
    assert issued - kernel._cancelled - pending == set(event_ids)


def test_stream_resumes_after_seq(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 4000})
    total = len(service.messages)
    first = sse_messages(client, limit=5)
    rest = sse_messages(client, limit=total - 5, after=first[-1]["seq"])
    seqs = [m["seq"] for m in first + rest]
    assert seqs == list(range(1, total + 1))


def test_stream_carries_deltas_and_periodic_snapshots(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 10_000})
    messages = sse_messages(client, limit=len(service.messages))
    kinds = {m["type"] for m in messages}
    assert kinds == {"event", "delta", "snapshot"}
    snapshots = [m for m in messages if m["type"] == "snapshot"]
    # one at attach, at least one per 2 simulated seconds while events flow,
    # and a catch-up at the end of a quiet stretch
    assert len(snapshots) >= 3
    assert snapshots[0]["time"] == 0
    assert snapshots[-1]["time"] == 10_000  # late joiners see the current state
    deltas = [m for m in messages if m["type"] == "delta"]
    assert any("instances" in d["changes"] for d in deltas)
    assert any("queue" in d["changes"] for d in deltas)


# -- pacing ---------------------------------------------------------------------------


def test_pace_changes_wall_speed_not_outcomes():
    def finished_log(pace):
        service = SimulationService(scripted_config(pace=pace))
        try:
            if pace > 0:
                service.submit({"kind": "start"})
                deadline = time.monotonic() + 10
                while time.monotonic() < deadline:
                    if service.submit({"kind": "get_state"})["state"]["time_ms"] >= 15_000:
                        break
                    time.sleep(0.01)
                service.submit({"kind": "pause"})
            service.submit({"kind": "advance", "until_ms": 30_000})
            sim = service.engine
            return [e.to_record() for e in sim.kernel.log]
        finally:
            service.close()

    assert finished_log(0.0) == finished_log(200_000.0)


def test_paced_run_tracks_wall_clock_roughly():
    service = SimulationService(scripted_config(pace=100_000.0))
    try:
        service.submit({"kind": "start"})
        time.sleep(0.25)
        service.submit({"kind": "pause"})
        t = service.submit({"kind": "get_state"})["state"]["time_ms"]
        # 0.25 s at 100k sim-ms per wall-s, generous bounds for CI jitter
        assert 5_000 <= t <= 120_000
    finally:
        service.close()


# -- battleground over HTTP ---------------------------------------------------------


def test_battleground_commands_and_endpoints(harness):
    client, service = harness
    assert client.get("/battleground/state").status_code == 404
    ack = client.post(
        "/command",
        json={"kind": "create_battleground", "scenario": "strategy-duel", "seed": 7},
    ).json()
    assert ack["battleground"] is True
    client.post("/command", json={"kind": "step_lockstep", "dt_ms": 5000})
    state = client.get("/battleground/state").json()
    assert state["battleground"] is True
    assert state["a"]["time_ms"] == state["b"]["time_ms"] == 5000
    # arena-less mutating command is ambiguous now
    assert (
        client.post("/command", json={"kind": "inject_requests", "n": 1}).status_code
        == 400
    )
    ack = client.post(
        "/command", json={"kind": "inject_requests", "n": 1, "arena": "A"}
    ).json()
    assert ack["ok"] is True
    report = client.get("/battleground/metrics").json()
    assert {"a", "b", "series"} <= set(report)
    blob = client.get("/battleground/export.csv").text
    assert blob.startswith("arena,request_id")


# -- command-log replay ------------------------------------------------------------------


def test_command_log_replay_reproduces_event_log():
    config = scripted_config()
    sim = Simulation(config)
    sim.run_until(1200)
    sim.apply_command({"kind": "update_config", "changes": {"exec_base_ms": {"f": 900}}})
    sim.run_until(2600)
    sim.apply_command({"kind": "inject_requests", "n": 2, "function_type": "f"})
    sim.run_until(4000)
    if any(n.state.value == "active" for n in sim.nodes.values()):
        sim.apply_command({"kind": "fail_node", "node": "N1"})
    sim.run_until(20_000)

    replayed = replay_with_commands(config, sim.command_log, until=20_000)
    original = [e.to_record() for e in sim.kernel.log]
    again = [e.to_record() for e in replayed.kernel.log]
    assert original == again


def test_export_csv_command_returns_payload(harness):
    client, service = harness
    client.post("/command", json={"kind": "advance", "until_ms": 3000})
    ack = client.post("/command", json={"kind": "export_csv"}).json()
    assert ack["ok"] is True
    assert ack["csv"].startswith("request_id,")
    assert ack["csv"] == client.get("/export.csv").text


def test_update_config_with_arena_label_in_battleground(harness):
    client, service = harness
    client.post(
        "/command",
        json={"kind": "create_battleground", "scenario": "strategy-duel", "seed": 3},
    )
    ack = client.post(
        "/command",
        json={
            "kind": "update_config",
            "arena": "B",
            "changes": {"cold_start_delay_ms": 123},
        },
    ).json()
    assert ack["config"]["cold_start_delay_ms"] == 123
    assert service.battleground.arena_b.config.cold_start_delay_ms == 123
    assert service.battleground.arena_a.config.cold_start_delay_ms != 123


def test_switching_workload_mode_stops_and_restarts_arrivals():
    config = make_config(workload=WorkloadSpec(mode="auto_rate", rate=2.0))
    service = SimulationService(config, start_loop=False)
    service.submit({"kind": "advance", "until_ms": 2000})
    assert len(service.engine.requests) == 4
    service.submit({"kind": "update_config", "changes": {"workload": {"mode": "manual"}}})
    service.submit({"kind": "advance", "until_ms": 10_000})
    # the already-scheduled arrival was cancelled along with the stream
    assert len(service.engine.requests) == 4
    service.submit({"kind": "update_config", "changes": {"workload": {"mode": "auto_rate"}}})
    service.submit({"kind": "advance", "until_ms": 12_000})
    assert len(service.engine.requests) > 4


def test_stream_buffer_trims_and_readers_resync(monkeypatch):
    import faaslab.service as service_module

    monkeypatch.setattr(service_module, "MAX_STREAM_MESSAGES", 25)
    monkeypatch.setattr(service_module, "STREAM_TRIM_CHUNK", 10)
    service = SimulationService(scripted_config(), start_loop=False)
    service.submit({"kind": "advance", "until_ms": 10_000})
    assert service._dropped > 0
    assert len(service.messages) <= 25
    # a reader starting from scratch jumps to the retained head: the seq gap
    # is the signal to re-hydrate
    chunks = list(service.stream(after=0, limit=len(service.messages)))
    seqs = [json.loads(c.split("data: ")[1])["seq"] for c in chunks]
    assert seqs[0] == service._dropped + 1
    assert seqs == list(range(seqs[0], seqs[0] + len(seqs)))
