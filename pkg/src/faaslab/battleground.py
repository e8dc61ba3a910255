"""Two isolated arenas fed a synchronised workload for strategy comparison.

The arenas share nothing mutable: each gets its own kernel, registries and
metrics. The arrival schedule is made common by seeding both workload
streams from the one shared seed, while service-time jitter comes from
per-arena streams so one arena's draws can never skew the other's.
"""

from __future__ import annotations

import io
from typing import Optional

from .config import SimConfig
from .engine import Simulation
from .errors import InvalidConfig
from .kernel import SimTime
from .metrics import export_csv


class Battleground:
    """Arena A vs arena B on a byte-identical arrival schedule."""

    def __init__(
        self, config_a: SimConfig, config_b: SimConfig, shared_workload_seed: int
    ) -> None:
        if config_a.workload.to_dict() != config_b.workload.to_dict():
            raise InvalidConfig(
                "battleground arenas must share the same workload spec"
            )
        self.shared_workload_seed = shared_workload_seed
        self.arena_a = Simulation(config_a, label="A", workload_seed=shared_workload_seed)
        self.arena_b = Simulation(config_b, label="B", workload_seed=shared_workload_seed)
        self.clock: SimTime = 0

    def arena(self, label: str) -> Simulation:
        if label == "A":
            return self.arena_a
        if label == "B":
            return self.arena_b
        raise InvalidConfig(f"no arena {label!r}; use 'A' or 'B'")

    def step_lockstep(self, dt_ms: int) -> tuple[int, int]:
        """Advance both virtual clocks by exactly dt; returns events processed."""
        if dt_ms < 0:
            raise ValueError("dt_ms must be >= 0")
        target = self.clock + dt_ms
        events_a = self.arena_a.run_until(target)
        events_b = self.arena_b.run_until(target)
        self.clock = target
        return events_a, events_b

    def run_until(self, t: SimTime) -> tuple[int, int]:
        if t < self.clock:
            raise ValueError("cannot run backwards")
        return self.step_lockstep(t - self.clock)

    # -- reporting -----------------------------------------------------------

    def report(self) -> dict:
        """Headline metrics per arena plus aligned comparison series."""
        return {
            "time_ms": self.clock,
            "a": _headline(self.arena_a),
            "b": _headline(self.arena_b),
            "series": self._paired_series(),
        }

    def _paired_series(self) -> dict:
        series_a = self.arena_a.metrics.series_payload()
        series_b = self.arena_b.metrics.series_payload()
        assert series_a["t"] == series_b["t"], "arenas sampled on different grids"
        paired = {"t": series_a["t"]}
        for name in ("queue_length", "cpu_utilisation", "mem_utilisation",
                     "live_instances", "cumulative_cost", "succeeded", "failed"):
            paired[name] = {"a": series_a[name], "b": series_b[name]}
        return paired

    def export_csv(self) -> str:
        """Both arenas' tables in the standard schema with a leading arena column."""
        buf = io.StringIO()
        for label, sim in (("A", self.arena_a), ("B", self.arena_b)):
            buf.write(
                export_csv(sim.requests.values(), sim.instances, sim.nodes, arena=label)
            )
            if label == "A":
                buf.write("\n")
        return buf.getvalue()

    def cold_start_count(self, label: str) -> int:
        """Number of instances ever provisioned (each implies one cold start)."""
        return len(self.arena(label).instances)


def _headline(sim: Simulation) -> dict:
    stats = sim.metrics.headline()
    elapsed_s = sim.kernel.clock / 1000 if sim.kernel.clock else None
    terminal = stats["succeeded"] + stats["total_failed"]
    return {
        "succeeded": stats["succeeded"],
        "failed": stats["failed"],
        "total_failed": stats["total_failed"],
        "avg_latency_ms": stats["avg_end_to_end_ms"],
        "success_rate": stats["succeeded"] / terminal if terminal else None,
        "throughput_rps": stats["succeeded"] / elapsed_s if elapsed_s else None,
        "cumulative_cost": stats["cumulative_cost"],
        "cold_starts": len(sim.instances),
    }


def from_scenario(
    raw: dict, seed: int, base_overrides: Optional[dict] = None
) -> Battleground:
    """Build a battleground from a scenario document with a `battleground`
    preset block ({"a": {...overrides}, "b": {...overrides}})."""
    base = SimConfig.from_dict(raw["config"])
    if base_overrides:
        base = base.update(base_overrides)
    preset = raw.get("battleground", {})
    config_a = base.update(dict(preset.get("a", {}), seed=seed))
    config_b = base.update(dict(preset.get("b", {}), seed=seed))
    return Battleground(config_a, config_b, shared_workload_seed=seed)
