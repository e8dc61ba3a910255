"""Headless control plane: one engine loop per arena, driven over HTTP.

The runner thread owns the simulation; HTTP handlers only exchange messages
with it through an ordered mailbox, so every command lands at an event
boundary and reads see immutable copies. Pacing maps simulated time onto
wall time for human viewing and never changes simulated outcomes.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from typing import Iterator, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, StreamingResponse

from .battleground import Battleground, from_scenario
from .config import SimConfig
from .engine import Simulation
from .errors import FaasLabError, InvalidConfig, UnknownCommand
from .kernel import SimEvent
from .workload import load_scenario_raw

AFAP_CHUNK_MS = 5000  # how far one loop iteration may run when pace == 0

# stream buffer bounds: readers that fall behind the trim window see a
# sequence gap and re-hydrate from /state (the client contract)
MAX_STREAM_MESSAGES = 50_000
STREAM_TRIM_CHUNK = 10_000


class SimulationService:
    """Owns either a single arena or a battleground plus the event stream."""

    def __init__(self, config: SimConfig, start_loop: bool = True) -> None:
        config.validate()
        self.base_config = config
        self.messages: list[dict] = []  # appended only by the runner thread
        self._dropped = 0  # messages trimmed off the front of the buffer
        self._mailbox: queue.Queue = queue.Queue()
        self._alive = True
        self._running = False
        self._anchor: Optional[tuple[float, int]] = None  # (wall, sim_ms)
        self._shadow: dict = {}
        self._last_snapshot_ms: dict[str, int] = {}
        self.engine: Optional[Simulation] = None
        self.battleground: Optional[Battleground] = None
        self._build_single(config)
        self._thread: Optional[threading.Thread] = None
        if start_loop:
            self._thread = threading.Thread(
                target=self._loop, name="faaslab-runner", daemon=True
            )
            self._thread.start()

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        self._alive = False
        if self._thread is not None:
            self._thread.join(timeout=2)

    def submit(self, command: dict, timeout: float = 10.0) -> dict:
        """Queue a command for the runner thread and wait for its ack."""
        if self._thread is None:
            return self._apply(command)  # loopless mode (tests)
        reply: queue.Queue = queue.Queue()
        self._mailbox.put((command, reply))
        kind, value = reply.get(timeout=timeout)
        if kind == "error":
            raise value
        return value

    # -- engine wiring --------------------------------------------------------

    def _build_single(self, config: SimConfig) -> None:
        sim = Simulation(config)
        self.engine = sim
        self.battleground = None
        self._shadow = {}
        self._last_snapshot_ms = {"A": 0}
        sim.listeners.append(lambda e, s=sim: self._on_event("A", s, e))
        self._append_snapshot("A", sim)

    def _build_battleground(self, battleground: Battleground) -> None:
        self.battleground = battleground
        self.engine = None
        self._shadow = {}
        self._last_snapshot_ms = {"A": 0, "B": 0}
        for label in ("A", "B"):
            sim = battleground.arena(label)
            sim.listeners.append(
                lambda e, lbl=label, s=sim: self._on_event(lbl, s, e)
            )
            self._append_snapshot(label, sim)

    @property
    def pace(self) -> float:
        if self.engine is not None:
            return self.engine.config.pace
        return self.battleground.arena_a.config.pace

    @property
    def sim_clock(self) -> int:
        if self.engine is not None:
            return self.engine.clock
        return self.battleground.clock

    # -- event stream -----------------------------------------------------------

    def _append_message(self, payload: dict) -> None:
        payload["seq"] = self._dropped + len(self.messages) + 1
        self.messages.append(payload)
        if len(self.messages) > MAX_STREAM_MESSAGES:
            # rebind rather than mutate: stream readers hold the old list
            self.messages = self.messages[STREAM_TRIM_CHUNK:]
            self._dropped += STREAM_TRIM_CHUNK

    def _append_snapshot(self, label: str, sim: Simulation) -> None:
        self._append_message(
            {"type": "snapshot", "arena": label, "time": sim.clock, "state": sim.snapshot()}
        )
        self._last_snapshot_ms[label] = sim.clock

    def _on_event(self, label: str, sim: Simulation, event: SimEvent) -> None:
        self._append_message(
            {"type": "event", "arena": label, "time": event.time, "event": event.to_record()}
        )
        delta = self._delta(label, sim)
        if delta:
            self._append_message(
                {"type": "delta", "arena": label, "time": event.time, "changes": delta}
            )
        interval = sim.config.snapshot_interval_ms
        if event.time - self._last_snapshot_ms[label] >= interval:
            self._append_snapshot(label, sim)

    def _delta(self, label: str, sim: Simulation) -> Optional[dict]:
        """Coarse per-entity state changes since the last emitted message."""
        changes: dict = {}
        for request in sim.requests.values():
            key = (label, "request", request.id)
            state = (request.status.value, request.assigned_instance)
            if self._shadow.get(key) != state:
                self._shadow[key] = state
                instance = (
                    sim.instances[request.assigned_instance].label
                    if request.assigned_instance is not None
                    else None
                )
                changes.setdefault("requests", []).append(
                    {"id": request.id, "status": request.status.value, "instance": instance}
                )
        for inst in sim.instances.values():
            key = (label, "instance", inst.id)
            state = (inst.state.value, len(inst.in_flight))
            if self._shadow.get(key) != state:
                self._shadow[key] = state
                changes.setdefault("instances", []).append(
                    {
                        "id": inst.label,
                        "state": inst.state.value,
                        "in_flight": len(inst.in_flight),
                        "node": f"N{inst.node_id}",
                    }
                )
        for node in sim.nodes.values():
            key = (label, "node", node.id)
            state = (node.state.value, str(node.cpu_used), node.mem_used_mb)
            if self._shadow.get(key) != state:
                self._shadow[key] = state
                changes.setdefault("nodes", []).append(
                    {
                        "id": node.label,
                        "state": node.state.value,
                        "cpu_used": float(node.cpu_used),
                        "cpu_capacity": float(node.cpu_capacity),
                        "mem_used_mb": node.mem_used_mb,
                        "mem_capacity_mb": node.mem_capacity_mb,
                    }
                )
        queue_ids = [e.request_id for e in sim.dispatcher.queue]
        key = (label, "queue")
        if self._shadow.get(key) != queue_ids:
            self._shadow[key] = queue_ids
            changes["queue"] = queue_ids
        return changes or None

    def stream(
        self, after: int = 0, limit: Optional[int] = None, poll_s: float = 0.02
    ) -> Iterator[str]:
        """Server-sent events: every message with seq > after, then follow.

        A reader that falls behind the retained window skips forward; the
        resulting seq gap tells the client to re-hydrate from /state.
        """
        next_seq = after + 1
        sent = 0
        while self._alive:
            buffer = self.messages  # trims rebind, so this view is stable
            dropped = self._dropped
            if buffer and buffer[0]["seq"] > next_seq:
                next_seq = buffer[0]["seq"]  # trimmed away: deliberate gap
            while next_seq - dropped - 1 < len(buffer):
                message = buffer[next_seq - dropped - 1]
                if message["seq"] != next_seq:  # raced a trim; resync
                    break
                next_seq += 1
                sent += 1
                data = json.dumps(message, sort_keys=True)
                yield f"id: {message['seq']}\nevent: message\ndata: {data}\n\n"
                if limit is not None and sent >= limit:
                    return
            if limit is not None and sent >= limit:
                return
            time.sleep(poll_s)

    # -- runner loop ----------------------------------------------------------------

    def _loop(self) -> None:
        while self._alive:
            self._drain_mailbox()
            if not self._running:
                time.sleep(0.002)
                continue
            target = self._next_target()
            if target is None or target <= self.sim_clock:
                time.sleep(0.002)
                continue
            self._advance(target)

    def _drain_mailbox(self) -> None:
        while True:
            try:
                command, reply = self._mailbox.get_nowait()
            except queue.Empty:
                return
            try:
                reply.put(("ok", self._apply(command)))
            except FaasLabError as exc:
                reply.put(("error", exc))
            except Exception as exc:  # defensive: never kill the loop
                reply.put(("error", FaasLabError(str(exc))))

    def _next_target(self) -> Optional[int]:
        pace = self.pace
        if pace <= 0:
            # as fast as possible, but only while there is work to do
            if self.engine is not None:
                pending = self.engine.kernel.peek_time()
                return None if pending is None else self.sim_clock + AFAP_CHUNK_MS
            pends = [
                self.battleground.arena(l).kernel.peek_time() for l in ("A", "B")
            ]
            if all(p is None for p in pends):
                return None
            return self.sim_clock + AFAP_CHUNK_MS
        wall, sim0 = self._anchor
        return sim0 + int((time.monotonic() - wall) * pace)

    def _advance(self, target: int) -> None:
        if self.engine is not None:
            self.engine.run_until(target)
            arenas = [("A", self.engine)]
        else:
            self.battleground.run_until(target)
            arenas = [("A", self.battleground.arena_a), ("B", self.battleground.arena_b)]
        # keep the late-joiner snapshot cadence even through quiet stretches
        for label, sim in arenas:
            if sim.clock - self._last_snapshot_ms[label] >= sim.config.snapshot_interval_ms:
                self._append_snapshot(label, sim)

    def _rewind_anchor(self) -> None:
        self._anchor = (time.monotonic(), self.sim_clock)

    def _snapshot_all(self) -> None:
        if self.engine is not None:
            self._append_snapshot("A", self.engine)
        else:
            self._append_snapshot("A", self.battleground.arena_a)
            self._append_snapshot("B", self.battleground.arena_b)

    # -- command handling ----------------------------------------------------------

    def _apply(self, command: dict) -> dict:
        kind = command.get("kind")
        arena = command.get("arena")
        if kind == "start":
            self._running = True
            self._rewind_anchor()
            return {"ok": True, "running": True, "time_ms": self.sim_clock}
        if kind == "pause":
            self._running = False
            return {"ok": True, "running": False, "time_ms": self.sim_clock}
        if kind == "reset":
            config = self.base_config
            if command.get("config"):
                config = config.update(command["config"])
                self.base_config = config
            self._running = False
            self._build_single(config)
            return {"ok": True, "time_ms": 0}
        if kind == "create_battleground":
            bg = self._make_battleground(command)
            self._running = False
            self._build_battleground(bg)
            return {"ok": True, "battleground": True}
        if kind == "step_lockstep":
            if self.battleground is None:
                raise UnknownCommand("step_lockstep requires a battleground")
            dt = int(command.get("dt_ms", 1000))
            events_a, events_b = self.battleground.step_lockstep(dt)
            self._snapshot_all()
            self._rewind_anchor()
            return {
                "ok": True,
                "time_ms": self.sim_clock,
                "events": {"a": events_a, "b": events_b},
            }
        if kind == "advance":
            until = int(command["until_ms"])
            self._advance(until)
            # explicit stepping always leaves an authoritative end snapshot
            self._snapshot_all()
            self._rewind_anchor()
            return {"ok": True, "time_ms": self.sim_clock}
        # reads execute here, in the runner thread, at an event boundary
        if kind == "get_state" and (arena is None or self.engine is not None):
            return {"ok": True, "state": self.state_payload()}
        if kind == "get_metrics" and (arena is None or self.engine is not None):
            return {"ok": True, "metrics": self.metrics_payload()}
        if kind == "get_export":
            return {"ok": True, "csv": self.export_csv()}
        # arena-level commands
        target = self._target_sim(arena, kind)
        result = target.apply_command(command)
        if kind == "update_config":
            self._rewind_anchor()
        return result

    def _target_sim(self, arena: Optional[str], kind: str) -> Simulation:
        if self.engine is not None:
            return self.engine
        if arena is None:
            raise UnknownCommand(
                f"{kind} requires an explicit arena label in battleground mode"
            )
        return self.battleground.arena(arena)

    def _make_battleground(self, command: dict) -> Battleground:
        seed = int(command.get("seed", self.base_config.seed))
        if command.get("scenario"):
            raw = load_scenario_raw(command["scenario"])
            return from_scenario(raw, seed=seed, base_overrides=command.get("overrides"))
        config_a = command.get("config_a")
        config_b = command.get("config_b")
        if not config_a or not config_b:
            raise InvalidConfig(
                "create_battleground needs config_a and config_b (or a scenario)"
            )
        return Battleground(
            SimConfig.from_dict(config_a), SimConfig.from_dict(config_b), seed
        )

    # -- read endpoints ---------------------------------------------------------------

    def state_payload(self) -> dict:
        if self.engine is not None:
            payload = self.engine.snapshot()
            payload["running"] = self._running
            return payload
        return {
            "battleground": True,
            "running": self._running,
            "time_ms": self.battleground.clock,
            "a": self.battleground.arena_a.snapshot(),
            "b": self.battleground.arena_b.snapshot(),
        }

    def metrics_payload(self) -> dict:
        if self.engine is not None:
            return self.engine.metrics_payload()
        return self.battleground.report()

    def export_csv(self) -> str:
        if self.engine is not None:
            return self.engine.export_csv()
        return self.battleground.export_csv()


def create_app(service: SimulationService, ui_dir: Optional[str] = None) -> FastAPI:
    """Build the FastAPI app around a running service."""
    app = FastAPI(title="faaslab control service", version="0.1.0")
    app.state.service = service

    @app.get("/state")
    def get_state():
        return service.submit({"kind": "get_state"})["state"]

    @app.get("/metrics")
    def get_metrics():
        return service.submit({"kind": "get_metrics"})["metrics"]

    @app.get("/export.csv")
    def get_export():
        csv_blob = service.submit({"kind": "get_export"})["csv"]
        return PlainTextResponse(csv_blob, media_type="text/csv")

    @app.post("/command")
    async def post_command(request: Request):
        try:
            command = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="command body must be JSON")
        if not isinstance(command, dict):
            raise HTTPException(status_code=400, detail="command must be an object")
        try:
            return service.submit(command)
        except FaasLabError as exc:
            raise HTTPException(
                status_code=400,
                detail={"error": type(exc).__name__, "message": str(exc)},
            )

    @app.get("/events")
    def get_events(after: int = 0, limit: Optional[int] = None):
        return StreamingResponse(
            service.stream(after=after, limit=limit),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache"},
        )

    @app.get("/battleground/state")
    def battleground_state():
        if service.battleground is None:
            raise HTTPException(status_code=404, detail="no battleground active")
        return service.submit({"kind": "get_state"})["state"]

    @app.get("/battleground/metrics")
    def battleground_metrics():
        if service.battleground is None:
            raise HTTPException(status_code=404, detail="no battleground active")
        return service.submit({"kind": "get_metrics"})["metrics"]

    @app.get("/battleground/export.csv")
    def battleground_export():
        if service.battleground is None:
            raise HTTPException(status_code=404, detail="no battleground active")
        csv_blob = service.submit({"kind": "get_export"})["csv"]
        return PlainTextResponse(csv_blob, media_type="text/csv")

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
