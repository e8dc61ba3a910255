"""Headless command line: run scenarios, battle strategies, serve the UI.

    faaslab run --scenario steady-state --until 60000 --seed 7 --out out/
    faaslab battleground --scenario strategy-duel --until 30000 --out out/
    faaslab serve --port 8080 --ui-dir frontend/dist
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .battleground import Battleground, from_scenario
from .config import ScriptedFailure, SimConfig, load_config_file
from .engine import Simulation
from .errors import FaasLabError
from .kernel import serialize_log
from .workload import BUNDLED_SCENARIOS, load_scenario_or_file, load_scenario_raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faaslab",
        description="Deterministic serverless-platform simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario headlessly and export data")
    run.add_argument(
        "--scenario",
        default="steady-state",
        help=f"bundled scenario name ({', '.join(BUNDLED_SCENARIOS)}) or config file",
    )
    run.add_argument("--until", type=int, default=60_000, help="simulated ms to run")
    run.add_argument("--seed", type=int, default=None, help="override the seed")
    run.add_argument("--routing", default=None, help="override routing strategy")
    run.add_argument("--placement", default=None, help="override placement strategy")
    run.add_argument(
        "--fail-node",
        action="append",
        default=[],
        metavar="NODE@MS",
        help="script a node failure, e.g. N1@5000 (repeatable)",
    )
    run.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    battle = sub.add_parser("battleground", help="run two arenas on one workload")
    battle.add_argument("--scenario", default=None, help="bundled battleground preset")
    battle.add_argument("--config-a", type=Path, default=None, help="arena A config file")
    battle.add_argument("--config-b", type=Path, default=None, help="arena B config file")
    battle.add_argument("--until", type=int, default=30_000)
    battle.add_argument("--seed", type=int, default=7)
    battle.add_argument("--out", type=Path, default=Path("out"))

    serve = sub.add_parser("serve", help="start the HTTP control service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--scenario", default="steady-state", help="initial scenario/config")
    serve.add_argument("--pace", type=float, default=1000.0, help="sim-ms per wall second (0 = max speed)")
    serve.add_argument("--ui-dir", default=None, help="static UI bundle to host at /")
    return parser


def parse_fail_node(spec: str) -> ScriptedFailure:
    try:
        node, at = spec.split("@", 1)
        return ScriptedFailure(node=node, at_ms=int(at))
    except ValueError as exc:
        raise FaasLabError(f"--fail-node wants NODE@MS, got {spec!r}") from exc


def _resolve_run_config(args) -> SimConfig:
    config = load_scenario_or_file(args.scenario)
    changes: dict = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.routing:
        changes["routing_strategy"] = args.routing
    if args.placement:
        changes["placement_strategy"] = args.placement
    if args.fail_node:
        failures = [parse_fail_node(s) for s in args.fail_node]
        changes["fail_node_at"] = [
            {"node": f.node, "at_ms": f.at_ms}
            for f in list(config.fail_node_at) + failures
        ]
    return config.update(changes) if changes else config


def _summary(sim: Simulation) -> dict:
    peak_instances = max(
        (s for s in sim.metrics.series["live_instances"]), default=0
    )
    return {
        "scenario": sim.config.workload.scenario_name,
        "seed": sim.config.seed,
        "until_ms": sim.clock,
        "events_processed": sim.processed_events,
        "stats": sim.metrics.headline(),
        "session": sim.metrics.session(),
        "peak_live_instances": peak_instances,
        "instances_provisioned": len(sim.instances),
        "nodes_provisioned": len(sim.nodes),
    }


def cmd_run(args) -> int:
    config = _resolve_run_config(args)
    sim = Simulation(config)
    sim.run_until(args.until)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "export.csv").write_bytes(sim.export_csv().encode("utf-8"))
    (args.out / "events.ndjson").write_bytes(
        serialize_log(sim.kernel.log).encode("utf-8")
    )
    (args.out / "summary.json").write_text(
        json.dumps(_summary(sim), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    stats = sim.metrics.headline()
    print(
        f"ran {args.until} ms: {stats['created']} requests, "
        f"{stats['succeeded']} succeeded, {stats['total_failed']} failed, "
        f"cost {stats['cumulative_cost']}"
    )
    print(f"artifacts in {args.out}/ (export.csv, events.ndjson, summary.json)")
    return 0


def cmd_battleground(args) -> int:
    if args.scenario:
        battleground = from_scenario(load_scenario_raw(args.scenario), seed=args.seed)
    elif args.config_a and args.config_b:
        config_a = load_config_file(args.config_a).update({"seed": args.seed})
        config_b = load_config_file(args.config_b).update({"seed": args.seed})
        battleground = Battleground(config_a, config_b, shared_workload_seed=args.seed)
    else:
        raise FaasLabError("battleground needs --scenario or both --config-a/--config-b")
    battleground.run_until(args.until)
    report = battleground.report()
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (args.out / "battleground.csv").write_bytes(
        battleground.export_csv().encode("utf-8")
    )
    for label, sim in (("a", battleground.arena_a), ("b", battleground.arena_b)):
        (args.out / f"events_{label}.ndjson").write_bytes(
            serialize_log(sim.kernel.log).encode("utf-8")
        )
    for label in ("a", "b"):
        side = report[label]
        print(
            f"arena {label.upper()}: {side['succeeded']} ok / {side['total_failed']} failed, "
            f"latency {side['avg_latency_ms']}, cold starts {side['cold_starts']}, "
            f"cost {side['cumulative_cost']}"
        )
    print(f"artifacts in {args.out}/ (report.json, battleground.csv, events_*.ndjson)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SimulationService, create_app

    config = load_scenario_or_file(args.scenario).update({"pace": args.pace})
    service = SimulationService(config)
    app = create_app(service, ui_dir=args.ui_dir)
    print(f"control service on http://{args.host}:{args.port}  (pace={args.pace})")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        service.close()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "battleground":
            return cmd_battleground(args)
        if args.command == "serve":
            return cmd_serve(args)
    except FaasLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
